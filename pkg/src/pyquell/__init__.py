from .config import settings
from .hooks import QUELL_INIT, QUELL_TERMINATE
from .schemas import RunConfig
from .harness import load_run_config, cmd_train, cmd_eval, cmd_baseline, cmd_simulate
