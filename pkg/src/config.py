import logging
import os
from pathlib import Path

from dotenv import dotenv_values
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parent.parent
ENV_FILE = BASE_DIR / ".env"


def _apply_env_file() -> None:
    """Re-read .env into the process environment; variables already set win."""
    if ENV_FILE.exists():
        for key, value in dotenv_values(ENV_FILE).items():
            if value is not None:
                os.environ.setdefault(key, value)


class Settings(BaseSettings):
    log_level: str = Field("INFO", alias="LOG_LEVEL")
    output_dir: Path = Field(Path("results"), alias="FMQSYNC_OUTPUT_DIR")
    # Phase-locking threshold for sync_lifetime, 8% of the maximal S = 1/8.
    sync_epsilon: float = Field(0.01, gt=0, alias="FMQSYNC_SYNC_EPSILON")
    max_workers: int = Field(1, ge=1, alias="FMQSYNC_MAX_WORKERS")
    verify_max_rows: int = Field(2, ge=1, alias="FMQSYNC_VERIFY_MAX_ROWS")
    verify_tolerance: float = Field(1e-4, gt=0, alias="FMQSYNC_VERIFY_TOLERANCE")

    model_config = SettingsConfigDict(
        env_file=str(ENV_FILE),
        env_file_encoding="utf-8",
        env_ignore_empty=True,
        populate_by_name=True,
        extra="ignore",
        case_sensitive=False,
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value):
        if value is None or value == "":
            return "INFO"
        return str(value).strip().upper()


_settings_cache: Settings | None = None


def get_settings(reload: bool = False) -> Settings:
    """Cached settings; reload=True re-reads .env and the environment."""
    global _settings_cache

    if _settings_cache is not None and not reload:
        return _settings_cache

    _apply_env_file()
    settings = Settings()
    _settings_cache = settings

    logger = logging.getLogger("fmqsync-config")
    logger.debug("Settings loaded:")
    logger.debug("  output dir: %s (env: %s)", settings.output_dir, os.getenv("FMQSYNC_OUTPUT_DIR", "NOT SET"))
    logger.debug("  sync epsilon: %s", settings.sync_epsilon)
    logger.debug("  sweep workers: %s", settings.max_workers)
    logger.debug("  verify: max_rows=%s tolerance=%s", settings.verify_max_rows, settings.verify_tolerance)

    return settings
