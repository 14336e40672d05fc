import click
import logging
import functools
from pathlib import Path

from .config import settings
from .errors import QuellError

logger = logging.getLogger(__name__)
logging.basicConfig(level=settings.LOG_LEVEL)

from .harness import (
    cmd_baseline, cmd_eval, cmd_sensitivity, cmd_simulate, cmd_train, load_run_config,
)

class QuellCliError(click.ClickException):
    """Categorized error message on stderr with the category's exit code."""

    def __init__(self, error: QuellError):
        super().__init__(str(error))
        self.category = error.category
        self.exit_code = error.exit_code

    def show(self, file=None) -> None:
        click.echo(f'error [{self.category}]: {self.format_message()}', err=True, file=file)

def reports_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except QuellError as e:
            raise QuellCliError(e) from e
    return wrapper

def config_options(func):
    func = click.option(
        '--set', 'overrides', multiple=True, metavar='SECTION.KEY=VALUE',
        help='Override a configuration key (repeatable).',
    )(func)
    func = click.option(
        '--config', 'config_path', type=click.Path(path_type=Path), default=None,
        help='Run configuration file (default: QUELL_CONFIG_PATH).',
    )(func)
    return func

output_option = click.option(
    '--output', 'output_dir', type=click.Path(path_type=Path), default=None,
    help='Run directory (default: output_dir of the configuration).',
)

@click.command()
@config_options
@output_option
@reports_errors
def train(config_path: Path | None, overrides: tuple[str, ...], output_dir: Path | None):
    """Train a recurrent PPO policy and write metrics, checkpoints and series."""
    config = load_run_config(config_path, overrides)
    run_dir = cmd_train(config, output_dir)
    click.echo(str(run_dir))

@click.command(name='eval')
@click.argument('checkpoint', type=click.Path(path_type=Path, exists=True, dir_okay=False))
@click.option('--episodes', 'n_episodes', type=int, default=None, help='Number of evaluation episodes.')
@config_options
@output_option
@reports_errors
def evaluate(checkpoint: Path, n_episodes: int | None, config_path: Path | None, overrides: tuple[str, ...], output_dir: Path | None):
    """Evaluate a checkpoint deterministically on random goals."""
    config = load_run_config(config_path, overrides)
    report = cmd_eval(checkpoint, config, n_episodes, output_dir)
    click.echo(report.summary.model_dump_json(indent=4))

@click.command()
@config_options
@output_option
@reports_errors
def baseline(config_path: Path | None, overrides: tuple[str, ...], output_dir: Path | None):
    """Compare input shapers on the configured point-to-point move."""
    config = load_run_config(config_path, overrides)
    for row in cmd_baseline(config, output_dir=output_dir):
        click.echo(
            f'{row.shaper:>5}  residual {row.residual_envelope:.3e} mm  '
            f'duration {row.move_duration:.3f} s  V {row.predicted_residual:.3e}'
        )

@click.command()
@click.argument('command_file', type=click.Path(path_type=Path, exists=True, dir_okay=False))
@click.argument('output', type=click.Path(path_type=Path, dir_okay=False))
@config_options
@reports_errors
def simulate(command_file: Path, output: Path, config_path: Path | None, overrides: tuple[str, ...]):
    """Run a velocity command file open-loop and write the (t, x, v, y) trace."""
    config = load_run_config(config_path, overrides)
    cmd_simulate(config, command_file, output)

@click.command()
@click.argument('output', type=click.Path(path_type=Path, dir_okay=False))
@click.option('--shaper', type=click.Choice(['none', 'zv', 'zvd']), default='zvd', show_default=True)
@click.option('--range', 'scale_range', type=(float, float), default=(0.5, 1.5), show_default=True,
              help='Band of true-to-design frequency ratios.')
@click.option('--points', type=int, default=101, show_default=True)
@config_options
@reports_errors
def sensitivity(output: Path, shaper: str, scale_range: tuple[float, float], points: int, config_path: Path | None, overrides: tuple[str, ...]):
    """Write the residual-vibration curve of a shaper over true frequencies."""
    config = load_run_config(config_path, overrides)
    cmd_sensitivity(config, shaper, scale_range, points, output)

@click.group()
def cli():
    """Pyquell Command Line Interface"""
    pass
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(baseline)
cli.add_command(simulate)
cli.add_command(sensitivity)
