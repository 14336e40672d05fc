import math
from dataclasses import dataclass

HISTORY_LENGTH = 5

@dataclass(frozen=True)
class Observation:
    """What the agent sees: no modal frequency, damping or deflection rate."""
    x: float                            # mm
    v: float                            # mm/s
    y_hist: tuple[float, ...]           # mm, oldest first
    x_g: float                          # mm

    def __post_init__(self):
        if len(self.y_hist) != HISTORY_LENGTH:
            raise ValueError(f'y_hist must hold {HISTORY_LENGTH} samples, got {len(self.y_hist)}')
        if not all(math.isfinite(value) for value in (self.x, self.v, self.x_g, *self.y_hist)):
            raise ValueError(f'Non-finite observation: {self}')

@dataclass(frozen=True)
class GoalSpec:
    x_g: float                          # target position, mm
    y_hat_g: float = 0.0                # desired vibration amplitude, mm

    def __post_init__(self):
        if self.y_hat_g < 0.0:
            raise ValueError(f'Desired vibration amplitude must be non-negative, got {self.y_hat_g}')

@dataclass(frozen=True)
class TraceRow:
    t: float
    x: float
    v: float
    y: float
    y_hat: float
    action: float
    reward: float
