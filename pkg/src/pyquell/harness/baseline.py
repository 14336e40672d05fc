"""
Input-shaping baselines
=======================

Point-to-point moves on the simulated axis under classical shapers. Moves are
simulated with a command sample period equal to dt_physics so that impulse
times are resolved finely; the modal parameters are those of the configured
axis.
"""

import math
import logging
import numpy as np
from pathlib import Path

from .io import write_csv
from .run import RunDirectory
from ..dynamics import FlexibleAxis, SystemState, modal_amplitude
from ..env import GoalSpec, trajectory_loss
from ..errors import InfeasibleMoveError, ShaperError
from ..schemas.config import AxisParams, MoveSpec, RunConfig, ShaperKind
from ..schemas.report import BaselineRow
from ..shapers import (
    ImpulseSequence, make_shaper, residual_vibration,
    sensitivity_curve, shape_command, trapezoidal_velocity,
)

logger = logging.getLogger(__name__)

BASELINE_COLUMNS = list(BaselineRow.model_fields)
SENSITIVITY_COLUMNS = ['omega_rad_s', 'V']

# Velocity-loop time constants to wait after the command ends before the
# deflection is a free oscillation
_LAG_CONSTANTS = 10

def fine_params(axis: AxisParams) -> AxisParams:
    return axis.model_copy(update={'dt_control': axis.dt_physics})

def _sample_shift(t: float, dt: float) -> int:
    return int(math.floor(t / dt + 0.5))

def _settle_samples(params: AxisParams, settle_time: float) -> tuple[int, int]:
    """(samples until the velocity loop has settled, samples of the residual window)"""
    dt = params.dt_control
    period = 2.0 * math.pi / params.damped_omega
    lag = math.ceil(_LAG_CONSTANTS * params.tau_v / dt)
    window = math.ceil(max(settle_time, period) / dt)
    return lag, window

def check_move(move: MoveSpec, axis: AxisParams) -> None:
    if move.v_peak > axis.v_max:
        raise InfeasibleMoveError(f'Move peak velocity {move.v_peak} mm/s exceeds v_max {axis.v_max} mm/s')

def simulate_move(params: AxisParams, start: float, command: np.ndarray, length: int) -> list[SystemState]:
    """Open-loop run from rest at start, padded with zero commands up to length samples."""
    padded = np.zeros(max(length, command.size), dtype=np.float64)
    padded[:command.size] = command
    axis = FlexibleAxis(params, SystemState.at_rest(start))
    return axis.simulate(padded)

def measured_residual_ratio(
    seq: ImpulseSequence,
    axis: AxisParams,
    move: MoveSpec | None = None,
    settle_time: float = 1.0,
) -> float:
    """
    Time-domain counterpart of residual_vibration: free-oscillation amplitude
    after the shaped move over that of the unshaped move delayed to the last
    impulse, both taken at the same instant once the axis has settled.
    """
    move = move or MoveSpec()
    params = fine_params(axis)
    dt = params.dt_control
    base = trapezoidal_velocity(move.distance, move.v_peak, move.accel, dt)
    shaped = shape_command(seq, base, dt)
    reference = np.concatenate([np.zeros(_sample_shift(seq.times[-1], dt)), base])

    lag, window = _settle_samples(params, settle_time)
    length = max(shaped.size, reference.size) + lag + window
    shaped_end = simulate_move(params, move.start, shaped, length)[-1]
    reference_end = simulate_move(params, move.start, reference, length)[-1]

    reference_amplitude = modal_amplitude(reference_end, params)
    if reference_amplitude == 0.0:
        raise ShaperError('The unshaped move leaves no residual vibration to compare against')
    return modal_amplitude(shaped_end, params) / reference_amplitude

def baseline_table(config: RunConfig, move: MoveSpec | None = None) -> list[BaselineRow]:
    axis = config.axis
    harness = config.harness
    move = move or harness.move
    check_move(move, axis)

    params = fine_params(axis)
    dt = params.dt_control
    design_omega = axis.omega_n * harness.model_omega_scale
    base = trapezoidal_velocity(move.distance, move.v_peak, move.accel, dt)
    goal = GoalSpec(x_g=move.start + move.distance)

    commands: dict[ShaperKind, tuple[ImpulseSequence, np.ndarray]] = {}
    for kind in harness.shapers:
        seq = make_shaper(kind, design_omega, axis.xi)
        commands[kind] = (seq, shape_command(seq, base, dt))

    lag, window = _settle_samples(params, harness.settle_time)
    length = max(cmd.size for _, cmd in commands.values()) + lag + window

    rows = []
    for kind, (seq, command) in commands.items():
        states = simulate_move(params, move.start, command, length)
        residual = states[command.size + lag:]
        rows.append(BaselineRow(
            shaper=kind,
            design_omega=design_omega,
            residual_envelope=float(max(abs(s.y) for s in residual)),
            move_duration=command.size * dt,
            trajectory_loss=trajectory_loss(states, goal),
            predicted_residual=residual_vibration(seq, axis.omega_n, axis.xi),
        ))
        logger.info(
            f'{kind}: residual envelope {rows[-1].residual_envelope:.3e} mm, '
            f'move duration {rows[-1].move_duration:.3f} s'
        )
    return rows

def cmd_baseline(config: RunConfig, move: MoveSpec | None = None, output_dir: Path | None = None) -> list[BaselineRow]:
    """Compare the configured shapers on one move and write baseline.csv."""
    rows = baseline_table(config, move)
    run = (RunDirectory(output_dir) if output_dir is not None else RunDirectory.for_config(config)).prepare()
    write_csv(run.baseline_path, rows, BASELINE_COLUMNS)
    return rows

def cmd_sensitivity(
    config: RunConfig,
    kind: ShaperKind,
    scale_range: tuple[float, float],
    points: int,
    output: Path,
) -> list[tuple[float, float]]:
    """Residual vibration of a shaper designed for the configured axis over a band of true frequencies."""
    if points < 1:
        raise ShaperError(f'Sensitivity grid needs at least one point, got {points}')
    axis = config.axis
    seq = make_shaper(kind, axis.omega_n * config.harness.model_omega_scale, axis.xi)
    lo, hi = scale_range
    curve = sensitivity_curve(seq, np.linspace(lo, hi, points) * axis.omega_n)
    write_csv(output, ({'omega_rad_s': omega, 'V': v} for omega, v in curve), SENSITIVITY_COLUMNS)
    return curve
