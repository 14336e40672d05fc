import torch
import logging
import numpy as np
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .gae import gae
from .loss import PpoBatch, PpoDiagnostics, ppo_loss
from .buffer import RolloutCarry, Trajectory, collect_rollout, initial_carry
from ..env import EnvPool
from ..neural import FEATURE_DIM, ObservationNormalizer, RecurrentActorCritic, RecurrentState, assign_gradients, backward, build_model, entropy
from ..schemas.config import PpoConfig, RunConfig
from ..schemas.report import UpdateMetrics

logger = logging.getLogger(__name__)

def linear_schedule(start: float, end: float, progress: float) -> float:
    progress = min(max(progress, 0.0), 1.0)
    return start + (end - start) * progress

def learning_rate_at(config: PpoConfig, step: int) -> float:
    if config.total_steps == 0:
        return config.learning_rate
    return linear_schedule(config.learning_rate, config.learning_rate_final, step / config.total_steps)

def entropy_coef_at(config: PpoConfig, step: int) -> float:
    if config.total_steps == 0:
        return config.entropy_coef
    return linear_schedule(config.entropy_coef, config.entropy_coef_final, step / config.total_steps)

def make_optimizer(model: RecurrentActorCritic, config: PpoConfig) -> torch.optim.Optimizer:
    if config.optimizer == 'sgd':
        return torch.optim.SGD(model.parameters(), lr=config.learning_rate)
    return torch.optim.Adam(model.parameters(), lr=config.learning_rate, eps=1e-5)

@dataclass
class UpdateResult:
    diagnostics: PpoDiagnostics     # averaged over the minibatches that ran
    epochs_run: int
    lr: float
    entropy_coef: float
    stopped_early: bool

def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)

def make_batch(
    trajectory: Trajectory,
    advantages: np.ndarray,
    returns: np.ndarray,
    sequences: np.ndarray,
) -> PpoBatch:
    """Gather sequences (index = chunk * n_envs + env) into a time-major batch."""
    L, N = trajectory.sequence_length, trajectory.n_envs
    chunks, envs = sequences // N, sequences % N
    time_index = chunks[None, :] * L + np.arange(L)[:, None]      # [L, B]
    env_index = np.broadcast_to(envs[None, :], time_index.shape)

    def gather(array: np.ndarray) -> torch.Tensor:
        return torch.from_numpy(np.ascontiguousarray(array[time_index, env_index]))

    return PpoBatch(
        obs=gather(trajectory.obs),
        raw_actions=gather(trajectory.raw_actions),
        old_log_probs=gather(trajectory.log_probs),
        advantages=gather(advantages),
        returns=gather(returns),
        starts=gather(trajectory.starts),
        state=RecurrentState(
            h=torch.from_numpy(np.ascontiguousarray(trajectory.snapshot_h[chunks, envs])),
            c=torch.from_numpy(np.ascontiguousarray(trajectory.snapshot_c[chunks, envs])),
        ),
    )

def update(
    model: RecurrentActorCritic,
    optimizer: torch.optim.Optimizer,
    trajectory: Trajectory,
    config: PpoConfig,
    step: int,
    rng: np.random.Generator,
) -> UpdateResult:
    """
    Run the configured epochs of minibatched sequence updates with truncated
    backpropagation through time. Stops the remaining epochs once the
    approximate divergence from the rollout policy exceeds max_kl.
    """
    advantages, returns = gae(
        trajectory.rewards, trajectory.values, trajectory.dones,
        trajectory.last_values, config.gamma, config.lambda_gae,
    )
    advantages = normalize_advantages(advantages)

    lr = learning_rate_at(config, step)
    entropy_coef = entropy_coef_at(config, step)
    for group in optimizer.param_groups:
        group['lr'] = lr

    history: list[PpoDiagnostics] = []
    epochs_run, stopped_early = 0, False
    n_sequences = trajectory.n_sequences
    for _ in range(config.epochs):
        epochs_run += 1
        order = rng.permutation(n_sequences)
        for sequences in np.array_split(order, config.n_minibatches):
            batch = make_batch(trajectory, advantages, returns, sequences)
            loss, diagnostics = ppo_loss(batch, model, config, entropy_coef)
            history.append(diagnostics)

            optimizer.zero_grad()
            assign_gradients(model, backward(loss, model))
            if config.max_grad_norm is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.max_grad_norm)
            optimizer.step()

            if config.max_kl is not None and diagnostics.approx_kl > config.max_kl:
                stopped_early = True
                break
        if stopped_early:
            logger.info(
                f'Divergence guard: approximate KL {history[-1].approx_kl:.4f} exceeds {config.max_kl}, '
                f'skipping the remaining epochs after epoch {epochs_run}'
            )
            break

    averaged = PpoDiagnostics(**{
        key: float(np.mean([getattr(d, key) for d in history]))
        for key in PpoDiagnostics.__dataclass_fields__
    }) if history else PpoDiagnostics(0.0, 0.0, entropy(model.log_std).item(), 0.0, 0.0, 0.0, 0.0)
    return UpdateResult(
        diagnostics=averaged, epochs_run=epochs_run, lr=lr,
        entropy_coef=entropy_coef, stopped_early=stopped_early,
    )

class PpoTrainer:
    """Alternates rollout collection over the environment pool with PPO updates."""

    def __init__(self, config: RunConfig, model: RecurrentActorCritic | None = None):
        self.config = config
        self.ppo = config.ppo
        self.pool = EnvPool.from_config(config, self.ppo.n_envs, seed=config.episode_seed)
        self.normalizer = ObservationNormalizer.from_config(config)
        self.model = model if model is not None else build_model(config, FEATURE_DIM)
        self.optimizer = make_optimizer(self.model, self.ppo)

        self.generator = torch.Generator().manual_seed(config.ppo_seed)
        self.rng = np.random.default_rng(config.ppo_seed)

        self.step = 0
        self.update_index = 0
        self.recent_returns: deque[float] = deque(maxlen=config.harness.smoothing_window)
        self.episode_log: list[tuple[int, float]] = []
        self.carry: RolloutCarry | None = None

    @property
    def mean_episode_reward(self) -> float | None:
        return float(np.mean(self.recent_returns)) if self.recent_returns else None

    def collect(self) -> Trajectory:
        if self.carry is None:
            self.carry = initial_carry(self.pool, self.model, self.normalizer)
        trajectory, self.carry = collect_rollout(
            self.pool, self.model, self.normalizer, self.carry,
            self.ppo.n_steps, self.generator, self.ppo.sequence_length,
        )
        for t, episode_return in trajectory.finished:
            self.episode_log.append((self.step + (t + 1) * self.ppo.n_envs, episode_return))
            self.recent_returns.append(episode_return)
        return trajectory

    def train_iteration(self) -> UpdateMetrics:
        trajectory = self.collect()
        result = update(self.model, self.optimizer, trajectory, self.ppo, self.step, self.rng)
        self.step += self.ppo.rollout_size
        self.update_index += 1

        d = result.diagnostics
        metrics = UpdateMetrics(
            step=self.step,
            update=self.update_index,
            episodes=len(self.episode_log),
            mean_episode_reward=self.mean_episode_reward,
            entropy=entropy(self.model.log_std).item(),
            clip_fraction=d.clip_fraction,
            approx_kl=d.approx_kl,
            policy_loss=d.policy_loss,
            value_loss=d.value_loss,
            entropy_loss=d.entropy_loss,
            total_loss=d.total_loss,
            lr=result.lr,
            entropy_coef=result.entropy_coef,
            epochs_run=result.epochs_run,
        )
        reward_text = 'n/a' if metrics.mean_episode_reward is None else f'{metrics.mean_episode_reward:.1f}'
        logger.info(
            f'update {metrics.update} step {metrics.step}: mean episode reward {reward_text}, '
            f'entropy {metrics.entropy:.3f}, clip {metrics.clip_fraction:.3f}, '
            f'kl {metrics.approx_kl:.4f}, lr {metrics.lr:.2e}'
        )
        return metrics

    def train(self, on_update: Callable[['PpoTrainer', UpdateMetrics], None] | None = None) -> list[UpdateMetrics]:
        history: list[UpdateMetrics] = []
        while self.step < self.ppo.total_steps:
            metrics = self.train_iteration()
            history.append(metrics)
            if on_update is not None:
                on_update(self, metrics)
        return history
