import math
from typing import Sequence

from .spaces import GoalSpec
from ..dynamics import SystemState
from ..errors import RewardDomainError
from ..schemas.config import RewardConfig

def goal_distance(state: SystemState, y_hat: float, goal: GoalSpec, cfg: RewardConfig) -> float:
    """Normalized position error plus normalized vibration error."""
    if not (state.is_finite and math.isfinite(y_hat) and math.isfinite(goal.x_g)):
        raise RewardDomainError(f'Non-finite reward inputs: state={state}, y_hat={y_hat}, goal={goal}')

    if cfg.position_error == 'relative':
        if goal.x_g == 0.0:
            raise RewardDomainError('Relative position error is undefined for x_g = 0, use absolute mode')
        position_term = abs(state.x - goal.x_g) / abs(goal.x_g)
    else:
        position_term = abs(state.x - goal.x_g) / cfg.x_ref

    # The desired amplitude is 0 when compensating, so the vibration term is
    # normalized by y_ref instead of by the desired amplitude
    vibration_term = abs(y_hat - goal.y_hat_g) / cfg.y_ref
    return position_term + vibration_term

def reward(state: SystemState, y_hat: float, goal: GoalSpec, cfg: RewardConfig) -> float:
    """Sparse reward: in-band value inside the goal band, out-of-band value elsewhere."""
    if goal_distance(state, y_hat, goal, cfg) < cfg.threshold:
        return cfg.in_band_reward
    return cfg.out_of_band_reward

def trajectory_loss(states: Sequence[SystemState], goal: GoalSpec) -> float:
    """Summed squared distance of the visited states to the goal, mm^2."""
    if len(states) == 0:
        raise RewardDomainError('Trajectory loss needs at least one state')
    return float(sum((s.x - goal.x_g) ** 2 + (s.y - goal.y_hat_g) ** 2 for s in states))
