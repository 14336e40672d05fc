import math
import logging
from pathlib import Path

from .io import write_csv
from ..dynamics import FlexibleAxis, SystemState
from ..errors import CommandFileError
from ..schemas.config import RunConfig

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['t', 'x', 'v', 'y']

def read_commands(path: Path) -> list[float]:
    """One velocity command (mm/s) per line; blank lines and '#' comments are skipped."""
    commands = []
    with open(path, 'rb') as f:
        for number, raw in enumerate(f, start=1):
            try:
                text = raw.decode('utf-8').strip()
            except UnicodeDecodeError as e:
                raise CommandFileError(str(path), number, f'line is not valid UTF-8 ({e.reason})') from None
            if not text or text.startswith('#'):
                continue
            try:
                value = float(text)
            except ValueError:
                raise CommandFileError(str(path), number, f'cannot parse "{text}" as a velocity command') from None
            if not math.isfinite(value):
                raise CommandFileError(str(path), number, f'velocity command "{text}" is not finite')
            commands.append(value)
    return commands

def simulate_commands(config: RunConfig, commands: list[float]) -> list[SystemState]:
    axis = FlexibleAxis(config.axis, SystemState.at_rest(config.episode.start_x))
    return axis.simulate(commands)

def cmd_simulate(config: RunConfig, command_file: Path, output: Path) -> list[SystemState]:
    """Open-loop simulation of a command file, written as a (t, x, v, y) trace."""
    commands = read_commands(command_file)
    states = simulate_commands(config, commands)
    write_csv(output, ({'t': s.t, 'x': s.x, 'v': s.v, 'y': s.y} for s in states), TRACE_COLUMNS)
    logger.info(f'Simulated {len(commands)} control periods from {command_file} into {output}')
    return states
