import logging
import numpy as np
from pathlib import Path
from collections import deque
from dataclasses import asdict

from .evaluate import run_policy_episode
from .io import CsvLog, write_csv
from .run import RunDirectory
from ..env import GoalSpec, VibrationEnv
from ..hooks import QUELL_INIT, QUELL_TERMINATE
from ..neural import entropy, save_checkpoint
from ..ppo import PpoTrainer
from ..schemas.config import RunConfig
from ..schemas.report import UpdateMetrics

logger = logging.getLogger(__name__)

METRICS_COLUMNS = list(UpdateMetrics.model_fields)
ENTROPY_COLUMNS = ['step', 'entropy', 'entropy_smoothed']

def probe_goal(config: RunConfig) -> GoalSpec:
    axis = config.axis
    return GoalSpec(x_g=axis.x_min + config.harness.probe_goal_fraction * axis.span)

class SmoothedSeries:
    """Trailing mean over the last `window` values, tracking the largest rise of the smoothed curve."""

    def __init__(self, window: int):
        self.values: deque[float] = deque(maxlen=window)
        self.smoothed: list[float] = []

    def row(self, step: int, value: float) -> dict[str, float]:
        self.values.append(value)
        self.smoothed.append(float(np.mean(self.values)))
        return {'step': step, 'entropy': value, 'entropy_smoothed': self.smoothed[-1]}

    @property
    def max_rise(self) -> float:
        return float(np.max(np.diff(self.smoothed))) if len(self.smoothed) > 1 else 0.0

    def report(self) -> None:
        rise = self.max_rise
        if rise > 0.0:
            logger.warning(f'Smoothed entropy is not monotone: it rises by up to {rise:.2e} nats between updates')
        else:
            logger.info(f'Smoothed entropy decayed from {self.smoothed[0]:.4f} to {self.smoothed[-1]:.4f}')

def write_probe_series(trainer: PpoTrainer, run: RunDirectory) -> None:
    """Deflection and action traces of one deterministic episode towards the probe goal."""
    config = trainer.config
    env = VibrationEnv.from_config(config, seed=config.harness.probe_seed, record=True)
    run_policy_episode(trainer.model, trainer.normalizer, env, episode_index=0, goal=probe_goal(config))

    write_csv(run.series_dir / 'deflection.csv', ({'t': r.t, 'y': r.y, 'y_hat': r.y_hat} for r in env.trace), ['t', 'y', 'y_hat'])
    write_csv(run.series_dir / 'action.csv', ({'t': r.t, 'action': r.action} for r in env.trace), ['t', 'action'])
    write_csv(run.series_dir / 'probe_trace.csv', (asdict(r) for r in env.trace), ['t', 'x', 'v', 'y', 'y_hat', 'action', 'reward'])

def cmd_train(config: RunConfig, output_dir: Path | None = None) -> Path:
    """
    Train a policy with PPO for ppo.total_steps environment steps.

    The run directory receives the archived configuration, metrics.csv, the
    initial, periodic and final checkpoints, and the series/ CSVs.
    """
    run = (RunDirectory(output_dir) if output_dir is not None else RunDirectory.for_config(config)).prepare()
    run.archive_config(config)
    QUELL_INIT(run.log_path)
    try:
        trainer = PpoTrainer(config)
        interval = config.harness.checkpoint_interval
        logger.info(
            f'Training seed {config.seed} for {config.ppo.total_steps} steps '
            f'({config.ppo.n_envs} envs x {config.ppo.n_steps} steps per rollout) into {run.root}'
        )
        logger.info(f'Vibration error normalized by y_ref = {config.reward.y_ref} mm, the desired amplitude being 0')

        metrics_log = CsvLog(run.metrics_path, METRICS_COLUMNS)
        entropy_log = CsvLog(run.series_dir / 'entropy.csv', ENTROPY_COLUMNS)
        entropy_series = SmoothedSeries(config.harness.entropy_window)
        entropy_log.append(entropy_series.row(0, entropy(trainer.model.log_std).item()))
        save_checkpoint(run.checkpoint_path(0), trainer.model, config.seed, 0)

        def on_update(trainer: PpoTrainer, metrics: UpdateMetrics) -> None:
            metrics_log.append(metrics)
            entropy_log.append(entropy_series.row(metrics.step, metrics.entropy))
            previous = metrics.step - config.ppo.rollout_size
            if metrics.step // interval > previous // interval:
                save_checkpoint(run.checkpoint_path(metrics.step), trainer.model, config.seed, metrics.step)

        trainer.train(on_update)
        entropy_series.report()

        save_checkpoint(run.final_checkpoint_path, trainer.model, config.seed, trainer.step)
        write_csv(
            run.series_dir / 'episode_reward.csv',
            ({'step': step, 'episode_return': ret} for step, ret in trainer.episode_log),
            ['step', 'episode_return'],
        )
        write_probe_series(trainer, run)
        logger.info(f'Training finished after {trainer.step} steps and {len(trainer.episode_log)} episodes')
    finally:
        QUELL_TERMINATE(run.log_path)
    return run.root
