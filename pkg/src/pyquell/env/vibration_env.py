import logging
import numpy as np
from collections import deque
from gymnasium import spaces

from .reward import reward as sparse_reward
from .spaces import HISTORY_LENGTH, GoalSpec, Observation, TraceRow
from ..dynamics import FlexibleAxis, SystemState, clamp_command
from ..errors import ConfigError, EpisodeProtocolError
from ..schemas.config import AxisParams, EpisodeConfig, RewardConfig, RunConfig

logger = logging.getLogger(__name__)

OBSERVATION_DIM = 3 + HISTORY_LENGTH

def episode_rng(seed: int, episode_index: int, env_index: int = 0) -> np.random.Generator:
    """Deterministic per-episode stream."""
    return np.random.default_rng(np.random.SeedSequence([seed, env_index, episode_index]))

def draw_goal(cfg: EpisodeConfig, rng: np.random.Generator, allow_zero: bool = False) -> GoalSpec:
    lo, hi = cfg.goal_range
    if not allow_zero and lo == hi == 0.0:
        raise ConfigError('Goal range [0, 0] only admits x_g = 0, which needs absolute position error')
    while True:
        x_g = lo if lo == hi else float(rng.uniform(lo, hi))
        if allow_zero or x_g != 0.0:
            return GoalSpec(x_g=x_g)

def sample_goal(cfg: EpisodeConfig, seed: int, episode_index: int, env_index: int = 0, allow_zero: bool = False) -> GoalSpec:
    return draw_goal(cfg, episode_rng(seed, episode_index, env_index), allow_zero)

class VibrationEnv:
    """
    Fixed-horizon vibration compensation task on the simulated axis.

    The agent commands a velocity each control period and observes position,
    velocity, the five most recent deflection samples and the goal. Reward is
    sparse: in-band only when position and vibration amplitude are both close
    to the goal.
    """

    def __init__(
        self,
        axis: AxisParams,
        episode: EpisodeConfig,
        reward: RewardConfig,
        seed: int = 0,
        env_index: int = 0,
        observation_noise_std: float = 0.0,
        record: bool = False,
    ):
        lo, hi = episode.goal_range
        if lo < axis.x_min or hi > axis.x_max:
            raise ConfigError(f'Goal range {episode.goal_range} exceeds travel {axis.travel}')

        self.axis_params = axis
        self.episode_cfg = episode
        self.reward_cfg = reward
        self.seed = seed
        self.env_index = env_index
        self.observation_noise_std = observation_noise_std
        self.record = record

        self.action_space = spaces.Box(low=-axis.v_max, high=axis.v_max, shape=(1,), dtype=np.float64)
        self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(OBSERVATION_DIM,), dtype=np.float64)

        self.axis = FlexibleAxis(axis)
        self.goal: GoalSpec | None = None
        self.y_hist: deque[float] = deque([0.0] * HISTORY_LENGTH, maxlen=HISTORY_LENGTH)
        self.episode_index = -1
        self.steps = 0
        self.done = True
        self.last_envelope = 0.0
        self.trace: list[TraceRow] = []
        self.states: list[SystemState] = []
        self._rng: np.random.Generator | None = None

    @classmethod
    def from_config(cls, config: RunConfig, seed: int, env_index: int = 0, record: bool = False) -> 'VibrationEnv':
        return cls(
            config.axis, config.episode, config.reward,
            seed=seed, env_index=env_index,
            observation_noise_std=config.harness.observation_noise_std,
            record=record,
        )

    @property
    def state(self) -> SystemState:
        return self.axis.state

    def _observe(self) -> Observation:
        state = self.axis.state
        return Observation(x=state.x, v=state.v, y_hist=tuple(self.y_hist), x_g=self.goal.x_g)

    def reset(self, episode_index: int | None = None, goal: GoalSpec | None = None) -> tuple[Observation, GoalSpec]:
        """Start a new episode at rest; the goal comes from the per-episode stream unless given."""
        self.episode_index = self.episode_index + 1 if episode_index is None else episode_index
        self._rng = episode_rng(self.seed, self.episode_index, self.env_index)

        allow_zero = self.reward_cfg.position_error == 'absolute'
        self.goal = goal if goal is not None else draw_goal(self.episode_cfg, self._rng, allow_zero)

        start_x = self.episode_cfg.start_x
        if self.episode_cfg.start_range is not None:
            start_x = float(self._rng.uniform(*self.episode_cfg.start_range))
        self.axis.reset(SystemState.at_rest(start_x))

        self.y_hist = deque([0.0] * HISTORY_LENGTH, maxlen=HISTORY_LENGTH)
        self.steps = 0
        self.done = False
        self.last_envelope = 0.0
        self.trace = []
        self.states = []
        return self._observe(), self.goal

    def step(self, action: float) -> tuple[Observation, float, bool]:
        if self.goal is None:
            raise EpisodeProtocolError('step() called before reset()')
        if self.done:
            raise EpisodeProtocolError(f'step() called after episode {self.episode_index} finished')

        command = clamp_command(float(action), self.axis_params)
        state = self.axis.advance(command)

        measured = state.y
        if self.observation_noise_std > 0.0:
            measured += float(self._rng.normal(0.0, self.observation_noise_std))
        self.y_hist.append(measured)

        self.last_envelope = self.axis.envelope()
        r = sparse_reward(state, self.last_envelope, self.goal, self.reward_cfg)

        self.steps += 1
        self.done = self.steps >= self.episode_cfg.horizon
        if self.record:
            self.states.append(state)
            self.trace.append(TraceRow(
                t=state.t, x=state.x, v=state.v, y=state.y,
                y_hat=self.last_envelope, action=command, reward=r,
            ))
        return self._observe(), r, self.done

class EnvPool:
    """Independent environments stepped in lock-step, each resetting itself when done."""

    def __init__(self, envs: list[VibrationEnv]):
        if not envs:
            raise ConfigError('Environment pool needs at least one environment')
        self.envs = envs
        self.observations: list[Observation] = []
        self.episode_returns = np.zeros(len(envs), dtype=np.float64)

    @classmethod
    def from_config(cls, config: RunConfig, n_envs: int, seed: int) -> 'EnvPool':
        return cls([VibrationEnv.from_config(config, seed=seed, env_index=i) for i in range(n_envs)])

    def __len__(self) -> int:
        return len(self.envs)

    def reset(self) -> list[Observation]:
        self.observations = [env.reset()[0] for env in self.envs]
        self.episode_returns[:] = 0.0
        return self.observations

    def step(self, actions: np.ndarray) -> tuple[list[Observation], np.ndarray, np.ndarray, list[float]]:
        """
        Step every environment. Returns the next observations (the first
        observation of a fresh episode where one finished), rewards, done
        flags and the returns of the episodes that finished.
        """
        rewards = np.zeros(len(self.envs), dtype=np.float64)
        dones = np.zeros(len(self.envs), dtype=bool)
        finished: list[float] = []
        for i, env in enumerate(self.envs):
            obs, r, done = env.step(float(actions[i]))
            rewards[i] = r
            dones[i] = done
            self.episode_returns[i] += r
            if done:
                finished.append(float(self.episode_returns[i]))
                self.episode_returns[i] = 0.0
                obs, _ = env.reset()
            self.observations[i] = obs
        return list(self.observations), rewards, dones, finished
