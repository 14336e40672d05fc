from pathlib import Path
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='QUELL_', env_file='.env', extra='ignore', validate_default=True)

    # Run configuration used when the CLI is not given --config
    CONFIG_PATH: Path = Path('./quell.config.yaml')

    # Parent directory of run directories
    OUTPUT_ROOT: Path = Path('./runs')

    # Root logger level for the CLI
    LOG_LEVEL: str = 'INFO'

    @field_validator('CONFIG_PATH', mode='before')
    @classmethod
    def validate_config_path(cls, v: str) -> Path:
        # Existence is checked when the file is read, so the settings object
        # stays importable from any working directory
        path = Path(v)
        if not path.is_absolute():
            path = Path.cwd() / path
        return path

    @field_validator('OUTPUT_ROOT', mode='before')
    @classmethod
    def validate_output_root(cls, p: str) -> Path:
        path = Path(p)
        if not path.is_absolute():
            path = Path.cwd() / path
        return path.resolve()

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f'Unknown log level "{v}"')
        return level

settings = Settings()
