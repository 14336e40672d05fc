from .buffer import Trajectory, RolloutCarry, collect_rollout, initial_carry
from .gae import gae, discounted_returns
from .loss import PpoBatch, PpoDiagnostics, clipped_surrogate, ppo_loss
from .trainer import (
    PpoTrainer, UpdateResult, update, make_batch, make_optimizer,
    linear_schedule, learning_rate_at, entropy_coef_at, normalize_advantages,
)
