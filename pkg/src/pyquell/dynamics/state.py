import math
import numpy as np
from dataclasses import dataclass

@dataclass(frozen=True)
class SystemState:
    """Full simulator state of the flexible axis."""
    x: float = 0.0          # carriage position, mm
    v: float = 0.0          # carriage velocity, mm/s
    y: float = 0.0          # flexible deflection, mm
    y_dot: float = 0.0      # deflection rate, mm/s
    t: float = 0.0          # simulation time, s

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in (self.x, self.v, self.y, self.y_dot, self.t))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.v, self.y, self.y_dot], dtype=np.float64)

    @classmethod
    def from_array(cls, values: np.ndarray, t: float) -> 'SystemState':
        return cls(x=float(values[0]), v=float(values[1]), y=float(values[2]), y_dot=float(values[3]), t=t)

    @classmethod
    def at_rest(cls, x: float = 0.0) -> 'SystemState':
        return cls(x=x)
