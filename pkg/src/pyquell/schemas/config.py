import math
from pathlib import Path
from typing import Literal
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ShaperKind = Literal['none', 'zv', 'zvd']

class AxisParams(BaseModel):
    """Physical and servo parameters of the simulated feed-drive axis."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    omega_n: float = Field(default=2.0 * math.pi * 10.0, gt=0.0)   # rad/s
    xi: float = Field(default=0.02, ge=0.0, lt=1.0)
    coupling_k: float = 0.002
    tau_v: float = Field(default=0.01, gt=0.0)                      # s
    v_max: float = Field(default=400.0, gt=0.0)                     # mm/s
    travel: tuple[float, float] = (0.0, 500.0)                      # mm
    dt_physics: float = Field(default=1e-3, gt=0.0)                 # s
    dt_control: float = Field(default=1e-2, gt=0.0)                 # s

    @field_validator('travel')
    @classmethod
    def validate_travel(cls, v: tuple[float, float]) -> tuple[float, float]:
        if not v[0] < v[1]:
            raise ValueError(f'travel must be an increasing range, got {v}')
        return v

    @model_validator(mode='after')
    def validate_timing(self) -> 'AxisParams':
        if self.dt_physics > self.dt_control:
            raise ValueError(f'dt_physics ({self.dt_physics}) must not exceed dt_control ({self.dt_control})')
        ratio = self.dt_control / self.dt_physics
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError(f'dt_control ({self.dt_control}) must be an integer multiple of dt_physics ({self.dt_physics})')
        return self

    @property
    def substeps(self) -> int:
        return int(round(self.dt_control / self.dt_physics))

    @property
    def damped_omega(self) -> float:
        return self.omega_n * math.sqrt(1.0 - self.xi ** 2)

    @property
    def x_min(self) -> float:
        return self.travel[0]

    @property
    def x_max(self) -> float:
        return self.travel[1]

    @property
    def span(self) -> float:
        return self.travel[1] - self.travel[0]

class EpisodeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    horizon: int = Field(default=500, ge=1)
    start_x: float = 0.0
    start_range: tuple[float, float] | None = None
    goal_range: tuple[float, float] = (50.0, 450.0)
    seed: int | None = None                     # None: run seed

    @field_validator('goal_range', 'start_range')
    @classmethod
    def validate_range(cls, v: tuple[float, float] | None) -> tuple[float, float] | None:
        if v is not None and v[0] > v[1]:
            raise ValueError(f'range lower bound exceeds upper bound: {v}')
        return v

class RewardConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    threshold: float = Field(default=0.01, gt=0.0)
    y_ref: float = Field(default=1.0, gt=0.0)                       # mm
    in_band_reward: float = 0.0
    out_of_band_reward: float = -1.0
    position_error: Literal['relative', 'absolute'] = 'relative'
    x_ref: float = Field(default=500.0, gt=0.0)                     # mm, absolute mode only

class NetworkConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    dense_sizes: tuple[int, ...] = (64, 64)
    recurrent_size: int = Field(default=64, ge=1)
    log_std_init: float | None = None           # None: log(0.5 * v_max * 0.2)
    deflection_scale: float | None = None       # None: reward.y_ref
    init_seed: int | None = None                # None: run seed

    @field_validator('dense_sizes')
    @classmethod
    def validate_dense_sizes(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(size < 1 for size in v):
            raise ValueError(f'dense layer sizes must be positive, got {v}')
        return v

class PpoConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    gamma: float = Field(default=0.99, ge=0.0, le=1.0)
    lambda_gae: float = Field(default=0.95, ge=0.0, le=1.0)
    clip_eps: float = Field(default=0.2, gt=0.0, lt=1.0)
    entropy_coef: float = Field(default=0.01, ge=0.0)
    entropy_coef_final: float = Field(default=0.001, ge=0.0)
    value_coef: float = Field(default=0.5, ge=0.0)
    learning_rate: float = Field(default=3e-4, ge=0.0)
    learning_rate_final: float = Field(default=0.0, ge=0.0)
    optimizer: Literal['adam', 'sgd'] = 'adam'
    epochs: int = Field(default=4, ge=1)
    n_envs: int = Field(default=8, ge=1)
    n_steps: int = Field(default=256, ge=1)
    sequence_length: int = Field(default=64, ge=1)
    n_minibatches: int = Field(default=4, ge=1)
    total_steps: int = Field(default=300_000, ge=0)
    max_kl: float | None = Field(default=0.05, gt=0.0)
    max_grad_norm: float | None = Field(default=0.5, gt=0.0)
    seed: int | None = None                     # None: run seed

    @model_validator(mode='after')
    def validate_batching(self) -> 'PpoConfig':
        if self.n_steps % self.sequence_length != 0:
            raise ValueError(f'n_steps ({self.n_steps}) must be a multiple of sequence_length ({self.sequence_length})')
        if self.n_sequences % self.n_minibatches != 0:
            raise ValueError(
                f'{self.n_sequences} sequences per rollout cannot be split into {self.n_minibatches} minibatches'
            )
        return self

    @property
    def rollout_size(self) -> int:
        return self.n_envs * self.n_steps

    @property
    def n_sequences(self) -> int:
        return self.n_envs * (self.n_steps // self.sequence_length)

class MoveSpec(BaseModel):
    """Point-to-point trapezoidal velocity move used by baseline comparisons."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    start: float = 50.0                         # mm
    distance: float = 200.0                     # mm, signed
    v_peak: float = Field(default=300.0, gt=0.0)   # mm/s
    accel: float = Field(default=6000.0, gt=0.0)   # mm/s^2

class HarnessConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    shapers: tuple[ShaperKind, ...] = ('none', 'zv', 'zvd')
    checkpoint_interval: int = Field(default=50_000, ge=1)
    probe_goal_fraction: float = Field(default=0.6, ge=0.0, le=1.0)
    probe_seed: int = 0
    eval_seed: int = 10_000
    eval_episodes: int = Field(default=50, ge=0)
    observation_noise_std: float = Field(default=0.0, ge=0.0)  # mm
    smoothing_window: int = Field(default=50, ge=1)
    entropy_window: int = Field(default=10, ge=1)                # updates
    move: MoveSpec = MoveSpec()
    settle_time: float = Field(default=1.0, ge=0.0)            # s
    model_omega_scale: float = Field(default=1.0, gt=0.0)

class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    seed: int = 0
    output_dir: Path | None = None
    axis: AxisParams = AxisParams()
    episode: EpisodeConfig = EpisodeConfig()
    reward: RewardConfig = RewardConfig()
    network: NetworkConfig = NetworkConfig()
    ppo: PpoConfig = PpoConfig()
    harness: HarnessConfig = HarnessConfig()

    @model_validator(mode='after')
    def validate_consistency(self) -> 'RunConfig':
        lo, hi = self.axis.travel
        g_lo, g_hi = self.episode.goal_range
        if g_lo < lo or g_hi > hi:
            raise ValueError(f'goal range {self.episode.goal_range} exceeds travel {self.axis.travel}')
        if not lo <= self.episode.start_x <= hi:
            raise ValueError(f'start position {self.episode.start_x} outside travel {self.axis.travel}')
        if self.episode.start_range is not None:
            s_lo, s_hi = self.episode.start_range
            if s_lo < lo or s_hi > hi:
                raise ValueError(f'start range {self.episode.start_range} exceeds travel {self.axis.travel}')
        if 0 < self.ppo.total_steps < self.ppo.rollout_size:
            raise ValueError(
                f'total_steps ({self.ppo.total_steps}) is smaller than one rollout ({self.ppo.rollout_size})'
            )
        move = self.harness.move
        if not (lo <= move.start <= hi and lo <= move.start + move.distance <= hi):
            raise ValueError(f'baseline move {move.start} -> {move.start + move.distance} leaves travel')
        return self

    @property
    def episode_seed(self) -> int:
        return self.seed if self.episode.seed is None else self.episode.seed

    @property
    def ppo_seed(self) -> int:
        return self.seed if self.ppo.seed is None else self.ppo.seed

    @property
    def init_seed(self) -> int:
        return self.seed if self.network.init_seed is None else self.network.init_seed

    @property
    def deflection_scale(self) -> float:
        return self.reward.y_ref if self.network.deflection_scale is None else self.network.deflection_scale

    @property
    def log_std_init(self) -> float:
        if self.network.log_std_init is not None:
            return self.network.log_std_init
        return math.log(0.5 * self.axis.v_max * 0.2)
