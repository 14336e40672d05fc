class QuellError(Exception):
    """Base of every categorized error raised by pyquell."""
    category: str = 'internal'
    exit_code: int = 1

class ConfigError(QuellError, ValueError):
    category = 'config'
    exit_code = 2

class ModelDomainError(QuellError, ValueError):
    category = 'model-domain'
    exit_code = 3

class InsufficientHistoryError(ModelDomainError):
    def __init__(self, available: int, required: int):
        super().__init__(
            f'Insufficient deflection history: {available} samples given, '
            f'at least {required} needed to span one damped period'
        )
        self.available = available
        self.required = required

class ShaperError(QuellError, ValueError):
    category = 'shaper'
    exit_code = 3

class InfeasibleMoveError(ShaperError):
    pass

class RewardDomainError(QuellError, ValueError):
    category = 'reward-domain'
    exit_code = 3

class EpisodeProtocolError(QuellError, RuntimeError):
    category = 'protocol'
    exit_code = 4

class ShapeMismatchError(QuellError, ValueError):
    category = 'shape'
    exit_code = 4

class NonFiniteError(QuellError, FloatingPointError):
    category = 'non-finite'
    exit_code = 5

    def __init__(self, message: str, node: str | None = None, diagnostics: dict | None = None):
        super().__init__(message)
        self.node = node
        self.diagnostics = diagnostics or {}

class ArchitectureMismatchError(QuellError, ValueError):
    category = 'architecture'
    exit_code = 6

    def __init__(self, differences: dict[str, tuple[object, object]]):
        details = ', '.join(
            f'{name}: checkpoint={found!r} config={expected!r}'
            for name, (found, expected) in differences.items()
        )
        super().__init__(f'Checkpoint architecture does not match configuration ({details})')
        self.differences = differences

class CommandFileError(QuellError, ValueError):
    category = 'command-file'
    exit_code = 7

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f'{path}:{line}: {message}')
        self.path = path
        self.line = line

class CheckpointError(QuellError, ValueError):
    category = 'checkpoint'
    exit_code = 8
