"""
Flexible feed-drive axis
========================

Rigid carriage behind a first-order velocity loop, carrying one base-excited
damped vibration mode:

    v'  = (clamp(u, +-v_max) - v) / tau_v
    x'  = v
    y'' = -2 xi omega_n y' - omega_n^2 y - coupling_k v'

The command is held constant over a control period and integrated with
classical Runge-Kutta in substeps of dt_physics. Hard travel limits clamp the
position and stop the carriage.
"""

import math
import logging
import numpy as np
from collections import deque
from typing import Callable, Iterable, Sequence

from .state import SystemState
from ..errors import InsufficientHistoryError, ModelDomainError
from ..schemas.config import AxisParams

logger = logging.getLogger(__name__)

def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    """4th-order Runge-Kutta step for the autonomous system y' = f(y)."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

def _derivatives(s: np.ndarray, u: float, params: AxisParams) -> np.ndarray:
    # s = [x, v, y, y_dot]
    v_dot = (u - s[1]) / params.tau_v
    y_ddot = (
        -2.0 * params.xi * params.omega_n * s[3]
        - params.omega_n ** 2 * s[2]
        - params.coupling_k * v_dot
    )
    return np.array([s[1], v_dot, s[3], y_ddot])

def clamp_command(u: float, params: AxisParams) -> float:
    return min(max(u, -params.v_max), params.v_max)

def step(state: SystemState, u: float, params: AxisParams) -> SystemState:
    """Advance the axis by one control period under the velocity command u (mm/s)."""
    if not state.is_finite:
        raise ModelDomainError(f'Non-finite simulator state: {state}')
    if not math.isfinite(u):
        raise ModelDomainError(f'Non-finite velocity command: {u}')

    u = clamp_command(u, params)
    f = lambda s: _derivatives(s, u, params)
    h = params.dt_physics

    s = state.as_array()
    for _ in range(params.substeps):
        s = rk4_step(f, s, h)
        if s[0] < params.x_min:
            s[0], s[1] = params.x_min, 0.0
        elif s[0] > params.x_max:
            s[0], s[1] = params.x_max, 0.0

    return SystemState.from_array(s, state.t + params.dt_control)

def envelope_window(params: AxisParams) -> int:
    """Number of control samples covering one damped period."""
    period = 2.0 * math.pi / params.damped_omega
    return max(1, math.ceil(period / params.dt_control - 1e-9))

def envelope(history: Sequence[float], params: AxisParams) -> float:
    """Vibration amplitude estimate: peak |y| over the trailing damped period."""
    required = envelope_window(params)
    if len(history) < required:
        raise InsufficientHistoryError(len(history), required)
    window = np.asarray(history, dtype=np.float64)[-required:]
    return float(np.max(np.abs(window)))

def modal_energy(state: SystemState, params: AxisParams) -> float:
    return 0.5 * (state.y_dot ** 2 + params.omega_n ** 2 * state.y ** 2)

def modal_amplitude(state: SystemState, params: AxisParams) -> float:
    """Instantaneous amplitude of a freely decaying deflection, from y and its rate."""
    sigma = params.xi * params.omega_n
    return math.hypot(state.y, (state.y_dot + sigma * state.y) / params.damped_omega)

class FlexibleAxis:
    """Single-owner simulator holding the current state and a deflection window."""

    def __init__(self, params: AxisParams, state: SystemState | None = None):
        self.params = params
        self._window = envelope_window(params)
        self.reset(state or SystemState.at_rest(params.x_min))

    def reset(self, state: SystemState) -> None:
        if not state.is_finite:
            raise ModelDomainError(f'Non-finite simulator state: {state}')
        self.state = state
        # The axis is assumed to have rested with the given deflection before t
        self.history: deque[float] = deque([state.y] * self._window, maxlen=self._window)

    def advance(self, u: float) -> SystemState:
        self.state = step(self.state, u, self.params)
        self.history.append(self.state.y)
        return self.state

    def envelope(self) -> float:
        return envelope(self.history, self.params)

    def simulate(self, commands: Iterable[float]) -> list[SystemState]:
        """Run an open-loop command sequence, returning the state after each period."""
        return [self.advance(u) for u in commands]
