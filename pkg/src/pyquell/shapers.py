"""
Input shaping baselines
=======================

Command shapers convolve a motion command with a short train of impulses so
that the vibration each impulse excites cancels at the design frequency.

- ZV (posicast): two impulses, zero residual vibration at (omega, xi).
- ZVD: three impulses, additionally zero derivative of the residual vibration
  with respect to frequency, trading duration for robustness.

Residual vibration of an impulse train A_i at t_i, evaluated for a mode
(omega, xi) with omega_d = omega * sqrt(1 - xi^2):

    V = exp(-xi omega t_n) * sqrt(C^2 + S^2)
    C = sum A_i exp(xi omega t_i) cos(omega_d t_i)
    S = sum A_i exp(xi omega t_i) sin(omega_d t_i)

V is 1 for the unshaped single impulse.
"""

import math
import logging
import numpy as np
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InfeasibleMoveError, ShaperError
from .schemas.config import ShaperKind

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class ImpulseSequence:
    impulses: tuple[tuple[float, float], ...]   # (time s, amplitude)
    design_omega: float = 0.0
    design_xi: float = 0.0

    def __post_init__(self):
        if not self.impulses:
            raise ShaperError('Impulse sequence is empty')
        times = self.times
        if times[0] != 0.0:
            raise ShaperError(f'First impulse must be at t = 0, got {times[0]}')
        if np.any(np.diff(times) <= 0.0):
            raise ShaperError(f'Impulse times must be strictly increasing, got {times.tolist()}')
        total = float(np.sum(self.amplitudes))
        if abs(total - 1.0) > 1e-9:
            raise ShaperError(f'Impulse amplitudes must sum to 1, got {total}')

    @classmethod
    def identity(cls) -> 'ImpulseSequence':
        return cls(impulses=((0.0, 1.0),))

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.impulses], dtype=np.float64)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.impulses], dtype=np.float64)

    @property
    def duration(self) -> float:
        return self.impulses[-1][0]

def _design_point(omega: float, xi: float) -> tuple[float, float]:
    """Return (omega_d, K) for a valid design point."""
    if not omega > 0.0:
        raise ShaperError(f'Design frequency must be positive, got {omega}')
    if not 0.0 <= xi < 1.0:
        raise ShaperError(f'Damping ratio must lie in [0, 1), got {xi}: no oscillatory mode to shape')
    root = math.sqrt(1.0 - xi ** 2)
    return omega * root, math.exp(-xi * math.pi / root)

def make_zv(omega: float, xi: float) -> ImpulseSequence:
    omega_d, K = _design_point(omega, xi)
    return ImpulseSequence(
        impulses=((0.0, 1.0 / (1.0 + K)), (math.pi / omega_d, K / (1.0 + K))),
        design_omega=omega,
        design_xi=xi,
    )

# Posicast is the two-part delayed command, identical to ZV in discrete form
make_posicast = make_zv

def make_zvd(omega: float, xi: float) -> ImpulseSequence:
    omega_d, K = _design_point(omega, xi)
    denominator = (1.0 + K) ** 2
    return ImpulseSequence(
        impulses=(
            (0.0, 1.0 / denominator),
            (math.pi / omega_d, 2.0 * K / denominator),
            (2.0 * math.pi / omega_d, K ** 2 / denominator),
        ),
        design_omega=omega,
        design_xi=xi,
    )

def make_shaper(kind: ShaperKind, omega: float, xi: float) -> ImpulseSequence:
    if kind == 'none':
        return ImpulseSequence.identity()
    elif kind == 'zv':
        return make_zv(omega, xi)
    elif kind == 'zvd':
        return make_zvd(omega, xi)
    raise ShaperError(f'Unknown shaper "{kind}", expected one of none, zv, zvd')

def residual_vibration(seq: ImpulseSequence, omega: float, xi: float) -> float:
    """Normalized residual vibration of the sequence applied to mode (omega, xi)."""
    omega_d, _ = _design_point(omega, xi)
    times, amplitudes = seq.times, seq.amplitudes
    # Factor exp(-xi omega t_n) into the sum to keep the exponentials bounded
    decay = amplitudes * np.exp(xi * omega * (times - times[-1]))
    C = np.sum(decay * np.cos(omega_d * times))
    S = np.sum(decay * np.sin(omega_d * times))
    return float(math.hypot(C, S))

def shape_command(seq: ImpulseSequence, command: Sequence[float], dt: float) -> np.ndarray:
    """
    Convolve a sampled command with the impulse train.

    Impulse times are rounded half-up to the nearest sample; amplitudes are not
    redistributed between neighbouring samples. The output is longer than the
    input by the delay of the last impulse.
    """
    if not dt > 0.0:
        raise ShaperError(f'Sample period must be positive, got {dt}')
    command = np.asarray(command, dtype=np.float64)
    shifts = [int(math.floor(t / dt + 0.5)) for t in seq.times]
    shaped = np.zeros(command.size + shifts[-1], dtype=np.float64)
    for shift, amplitude in zip(shifts, seq.amplitudes):
        shaped[shift:shift + command.size] += amplitude * command
    return shaped

def sensitivity_curve(seq: ImpulseSequence, omega_range: Iterable[float]) -> list[tuple[float, float]]:
    """Residual vibration over a grid of true modal frequencies at the design damping."""
    omegas = [float(omega) for omega in omega_range]
    if not omegas:
        raise ShaperError('Frequency grid is empty')
    return [(omega, residual_vibration(seq, omega, seq.design_xi)) for omega in omegas]

def trapezoidal_velocity(distance: float, v_peak: float, accel: float, dt: float) -> np.ndarray:
    """
    Sampled velocity command of a point-to-point move.

    The profile is trapezoidal, or triangular when the distance is too short to
    reach v_peak. Samples are taken mid-period and rescaled so that their sum
    times dt equals the signed distance exactly.
    """
    if not (v_peak > 0.0 and accel > 0.0 and dt > 0.0):
        raise InfeasibleMoveError(f'Move needs positive v_peak, accel and dt, got {v_peak}, {accel}, {dt}')
    length = abs(distance)
    if length == 0.0:
        return np.zeros(0, dtype=np.float64)

    peak = min(v_peak, math.sqrt(length * accel))
    t_ramp = peak / accel
    t_cruise = (length - peak * t_ramp) / peak
    t_total = 2.0 * t_ramp + t_cruise

    n = max(1, math.ceil(t_total / dt))
    t = (np.arange(n) + 0.5) * dt
    profile = np.minimum.reduce([accel * t, np.full(n, peak), accel * (t_total - t)])
    profile = np.clip(profile, 0.0, None)
    profile *= length / (np.sum(profile) * dt)
    return math.copysign(1.0, distance) * profile
