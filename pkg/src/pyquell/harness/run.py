import os
import yaml
import logging
from pathlib import Path
from typing import Iterable
from pydantic import ValidationError

from ..config import settings
from ..errors import ConfigError
from ..schemas.config import RunConfig
from ..utils import set_dotted, split_override

logger = logging.getLogger(__name__)

def apply_overrides(data: dict, overrides: Iterable[str]) -> dict:
    for override in overrides:
        try:
            key, value = split_override(override)
            set_dotted(data, key, value)
        except (ValueError, yaml.YAMLError) as e:
            raise ConfigError(str(e)) from e
    return data

def load_run_config(path: Path | None = None, overrides: Iterable[str] = ()) -> RunConfig:
    """
    Read a run configuration file and apply ``section.key=value`` overrides.

    A missing file is only accepted for the default location, in which case
    the built-in defaults are used.
    """
    explicit = path is not None
    path = Path(path) if explicit else settings.CONFIG_PATH

    data: dict = {}
    if path.exists():
        try:
            with open(path, 'r') as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f'Cannot parse configuration file {path}: {e}') from e
        if not isinstance(data, dict):
            raise ConfigError(f'Configuration file {path} must hold a mapping at the top level')
    elif explicit:
        raise ConfigError(f'Configuration file {path} does not exist')
    else:
        logger.debug(f'No configuration file at {path}, using defaults')

    apply_overrides(data, overrides)
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f'Invalid run configuration: {e}') from e

def dump_run_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode='json'), sort_keys=False)

def resolve_output_dir(config: RunConfig) -> Path:
    if config.output_dir is not None:
        return Path(config.output_dir)
    return settings.OUTPUT_ROOT / f'seed-{config.seed}'

class RunDirectory:
    """
    Layout of one run:

        <root>/config.yaml        archived run configuration
        <root>/metrics.csv        one row per PPO update
        <root>/checkpoints/       step-<n>.npz and final.npz
        <root>/series/            episode_reward, deflection, action, entropy CSVs
        <root>/eval.csv           per-episode evaluation metrics
        <root>/summary.json       evaluation summary
        <root>/baseline.csv       shaper comparison table
        <root>/run.log            log of the run
    """

    def __init__(self, root: Path):
        self.root = Path(root)

    @classmethod
    def for_config(cls, config: RunConfig) -> 'RunDirectory':
        return cls(resolve_output_dir(config))

    @property
    def config_path(self) -> Path:
        return self.root / 'config.yaml'

    @property
    def metrics_path(self) -> Path:
        return self.root / 'metrics.csv'

    @property
    def checkpoint_dir(self) -> Path:
        return self.root / 'checkpoints'

    @property
    def series_dir(self) -> Path:
        return self.root / 'series'

    @property
    def eval_path(self) -> Path:
        return self.root / 'eval.csv'

    @property
    def summary_path(self) -> Path:
        return self.root / 'summary.json'

    @property
    def baseline_path(self) -> Path:
        return self.root / 'baseline.csv'

    @property
    def log_path(self) -> Path:
        return self.root / 'run.log'

    def checkpoint_path(self, step: int) -> Path:
        return self.checkpoint_dir / f'step-{step:09d}.npz'

    @property
    def final_checkpoint_path(self) -> Path:
        return self.checkpoint_dir / 'final.npz'

    def prepare(self) -> 'RunDirectory':
        """Create the directory tree, failing early when it cannot be written."""
        try:
            for directory in (self.root, self.checkpoint_dir, self.series_dir):
                directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f'Cannot create run directory {self.root}: {e}') from e
        if not os.access(self.root, os.W_OK):
            raise ConfigError(f'Run directory {self.root} is not writable')
        return self

    def archive_config(self, config: RunConfig) -> Path:
        with open(self.config_path, 'w') as f:
            f.write(dump_run_config(config))
        return self.config_path
