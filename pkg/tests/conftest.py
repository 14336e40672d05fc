import os
import pytest
from pathlib import Path

from pyquell.harness import load_run_config
from pyquell.neural import FEATURE_DIM, build_model
from pyquell.schemas import AxisParams, RunConfig

TESTS_DIR = Path(__file__).parent
TINY_CONFIG = TESTS_DIR / 'quell.config.yaml'

def pytest_collection_modifyitems(config, items):
    if os.environ.get('QUELL_RUN_SLOW') == '1':
        return
    skip_slow = pytest.mark.skip(reason='set QUELL_RUN_SLOW=1 to run desk-scale training')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)

@pytest.fixture
def axis() -> AxisParams:
    return AxisParams()

@pytest.fixture
def tiny_config_path() -> Path:
    return TINY_CONFIG

@pytest.fixture
def tiny_config(tmp_path: Path) -> RunConfig:
    return load_run_config(TINY_CONFIG, [f'output_dir={tmp_path / "run"}'])

@pytest.fixture
def tiny_model(tiny_config: RunConfig):
    return build_model(tiny_config, FEATURE_DIM)
