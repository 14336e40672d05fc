import torch
import logging
from pathlib import Path

from .config import settings

logger = logging.getLogger(__name__)

_run_handlers: dict[Path, logging.Handler] = {}

def QUELL_INIT(log_path: Path | None = None) -> None:
    # Single-threaded deterministic kernels keep repeated runs byte-identical
    torch.set_num_threads(1)
    torch.use_deterministic_algorithms(True)

    if log_path is None:
        logger.debug('No run log path provided, logging to the console only.')
        return

    log_path = Path(log_path)
    if log_path in _run_handlers:
        return
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_path, mode='w')
    handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    package_logger = logging.getLogger('pyquell')
    package_logger.setLevel(settings.LOG_LEVEL)
    package_logger.addHandler(handler)
    _run_handlers[log_path] = handler

def QUELL_TERMINATE(log_path: Path | None = None) -> None:
    """Detach and close run log handlers (all of them when no path is given)."""
    paths = list(_run_handlers) if log_path is None else [Path(log_path)]
    for path in paths:
        handler = _run_handlers.pop(path, None)
        if handler is None:
            continue
        logging.getLogger('pyquell').removeHandler(handler)
        handler.close()
