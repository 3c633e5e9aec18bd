import logging

from src.config import get_settings

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def setup_logger(level: str | None = None) -> logging.Logger:
    settings = get_settings()
    name = (level or settings.log_level).upper()
    resolved = getattr(logging, name, logging.INFO)
    logging.basicConfig(level=resolved, format=LOG_FORMAT)
    # basicConfig is a no-op once handlers exist; --log-level still has to apply.
    logging.getLogger().setLevel(resolved)
    return logging.getLogger("fmqsync")


logger = setup_logger()
