import numpy as np
from dataclasses import dataclass
from typing import Sequence

from ..env.spaces import Observation
from ..env.vibration_env import OBSERVATION_DIM
from ..schemas.config import RunConfig

# Raw observation plus the goal error in travel units and in band units
FEATURE_DIM = OBSERVATION_DIM + 2

@dataclass(frozen=True)
class ObservationNormalizer:
    """
    Scales positions by the travel span, velocity by v_max and deflections by a
    reference amplitude, then appends the goal error twice: once over the travel
    span and once squashed in units of the reward band half-width, so the policy
    resolves the last millimetres around the goal.
    """
    x_min: float
    span: float
    v_max: float
    deflection_scale: float
    threshold: float
    band_scale: float | None = None             # None: relative band, threshold * |x_g|

    @classmethod
    def from_config(cls, config: RunConfig) -> 'ObservationNormalizer':
        absolute = config.reward.position_error == 'absolute'
        return cls(
            x_min=config.axis.x_min,
            span=config.axis.span,
            v_max=config.axis.v_max,
            deflection_scale=config.deflection_scale,
            threshold=config.reward.threshold,
            band_scale=config.reward.x_ref if absolute else None,
        )

    def band_half_width(self, x_g: float) -> float:
        width = self.threshold * (abs(x_g) if self.band_scale is None else self.band_scale)
        return width if width > 0.0 else self.span

    def normalize(self, obs: Observation) -> np.ndarray:
        error = obs.x_g - obs.x
        return np.array([
            (obs.x - self.x_min) / self.span,
            obs.v / self.v_max,
            *(y / self.deflection_scale for y in obs.y_hist),
            (obs.x_g - self.x_min) / self.span,
            error / self.span,
            np.tanh(error / self.band_half_width(obs.x_g)),
        ], dtype=np.float64)

    def normalize_batch(self, observations: Sequence[Observation]) -> np.ndarray:
        return np.stack([self.normalize(obs) for obs in observations])
