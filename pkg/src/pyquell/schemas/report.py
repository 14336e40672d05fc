from pydantic import BaseModel

class EpisodeMetrics(BaseModel):
    episode: int
    goal_x: float
    final_position_error: float         # mm
    residual_envelope: float            # mm
    settling_step: int | None           # None when the episode ends out of band
    episode_return: float
    trajectory_loss: float              # mm^2
    tail_in_band_fraction: float        # fraction of reward-0 steps over the episode tail

class EvalSummary(BaseModel):
    checkpoint: str
    episodes: int
    tail_steps: int
    mean_final_position_error: float | None = None
    mean_residual_envelope: float | None = None
    mean_episode_return: float | None = None
    mean_tail_in_band_fraction: float | None = None
    success_fraction: float | None = None   # episodes whose tail fraction meets the success threshold

class EvalReport(BaseModel):
    summary: EvalSummary
    episodes: list[EpisodeMetrics] = []

class BaselineRow(BaseModel):
    shaper: str
    design_omega: float                 # rad/s the shaper was designed for
    residual_envelope: float            # mm, after command completion
    move_duration: float                # s
    trajectory_loss: float              # mm^2
    predicted_residual: float           # closed-form V at the true axis frequency

class UpdateMetrics(BaseModel):
    step: int
    update: int
    episodes: int
    mean_episode_reward: float | None
    entropy: float
    clip_fraction: float
    approx_kl: float
    policy_loss: float
    value_loss: float
    entropy_loss: float
    total_loss: float
    lr: float
    entropy_coef: float
    epochs_run: int
