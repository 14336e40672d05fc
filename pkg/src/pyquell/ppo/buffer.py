import torch
import logging
import numpy as np
from dataclasses import dataclass, field

from ..env import EnvPool
from ..errors import ShapeMismatchError
from ..neural import ObservationNormalizer, RecurrentActorCritic, RecurrentState, sample_action

logger = logging.getLogger(__name__)

@dataclass
class RolloutCarry:
    """Environment-side state carried from one rollout into the next."""
    obs: np.ndarray             # normalized observations, [N, D]
    state: RecurrentState       # recurrent state before processing obs
    starts: np.ndarray          # obs is the first observation of an episode, [N]

@dataclass
class Trajectory:
    """
    Time-major rollout record over N environments. Recurrent snapshots are
    stored only at truncation boundaries, every sequence_length steps, and hold
    the state before the episode-start reset of that step.
    """
    obs: np.ndarray             # [T, N, D]
    raw_actions: np.ndarray     # [T, N, A], unclamped Gaussian draws
    actions: np.ndarray         # [T, N, A], clamped commands sent to the axis
    rewards: np.ndarray         # [T, N]
    log_probs: np.ndarray       # [T, N]
    values: np.ndarray          # [T, N]
    starts: np.ndarray          # [T, N]
    dones: np.ndarray           # [T, N]
    snapshot_h: np.ndarray      # [T // L, N, H]
    snapshot_c: np.ndarray      # [T // L, N, H]
    last_values: np.ndarray     # [N], bootstrap values after the last step
    sequence_length: int
    finished: list[tuple[int, float]] = field(default_factory=list)   # (step index, episode return)

    def __post_init__(self):
        T = self.rewards.shape[0]
        for name in ('obs', 'raw_actions', 'actions', 'log_probs', 'values', 'starts', 'dones'):
            if getattr(self, name).shape[0] != T:
                raise ShapeMismatchError(f'Trajectory field "{name}" has {getattr(self, name).shape[0]} steps, expected {T}')

    @property
    def n_steps(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_envs(self) -> int:
        return self.rewards.shape[1]

    @property
    def n_sequences(self) -> int:
        return self.n_envs * (self.n_steps // self.sequence_length)

def initial_carry(pool: EnvPool, model: RecurrentActorCritic, normalizer: ObservationNormalizer) -> RolloutCarry:
    observations = pool.reset()
    return RolloutCarry(
        obs=normalizer.normalize_batch(observations),
        state=model.initial_state(len(pool)),
        starts=np.ones(len(pool), dtype=bool),
    )

@torch.no_grad()
def collect_rollout(
    pool: EnvPool,
    model: RecurrentActorCritic,
    normalizer: ObservationNormalizer,
    carry: RolloutCarry,
    n_steps: int,
    generator: torch.Generator,
    sequence_length: int,
) -> tuple[Trajectory, RolloutCarry]:
    """Run the stochastic policy for exactly n_steps in every environment."""
    N, D = carry.obs.shape
    A = model.spec.action_dim
    H = model.spec.recurrent_size
    n_chunks = n_steps // sequence_length if n_steps else 0

    obs = np.zeros((n_steps, N, D))
    raw_actions = np.zeros((n_steps, N, A))
    actions = np.zeros((n_steps, N, A))
    rewards = np.zeros((n_steps, N))
    log_probs = np.zeros((n_steps, N))
    values = np.zeros((n_steps, N))
    starts = np.zeros((n_steps, N), dtype=bool)
    dones = np.zeros((n_steps, N), dtype=bool)
    snapshot_h = np.zeros((n_chunks, N, H))
    snapshot_c = np.zeros((n_chunks, N, H))
    finished: list[tuple[int, float]] = []

    state = carry.state
    current_obs, current_starts = carry.obs, carry.starts
    for t in range(n_steps):
        if t % sequence_length == 0 and t // sequence_length < n_chunks:
            snapshot = state.detach()
            snapshot_h[t // sequence_length] = snapshot.h.numpy()
            snapshot_c[t // sequence_length] = snapshot.c.numpy()

        state = state.reset_where(torch.from_numpy(current_starts))
        mean, value, state = model.step(torch.from_numpy(current_obs), state)
        sampled = sample_action(mean, model.log_std, generator, model.spec.v_max)

        next_observations, r, done, returns = pool.step(sampled.action[:, 0].numpy())

        obs[t] = current_obs
        raw_actions[t] = sampled.raw.numpy()
        actions[t] = sampled.action.numpy()
        rewards[t] = r
        log_probs[t] = sampled.log_prob.numpy()
        values[t] = value.numpy()
        starts[t] = current_starts
        dones[t] = done
        finished.extend((t, episode_return) for episode_return in returns)

        current_obs = normalizer.normalize_batch(next_observations)
        current_starts = done.copy()

    _, last_value, _ = model.step(
        torch.from_numpy(current_obs), state.reset_where(torch.from_numpy(current_starts))
    )
    trajectory = Trajectory(
        obs=obs, raw_actions=raw_actions, actions=actions, rewards=rewards,
        log_probs=log_probs, values=values, starts=starts, dones=dones,
        snapshot_h=snapshot_h, snapshot_c=snapshot_c,
        last_values=last_value.numpy().copy(),
        sequence_length=sequence_length,
        finished=finished,
    )
    return trajectory, RolloutCarry(obs=current_obs, state=state.detach(), starts=current_starts)
