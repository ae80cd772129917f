import os
import logging
from logging.handlers import RotatingFileHandler

from rich.logging import RichHandler

EVENTS_LEVEL_NUM = 38
DEFAULT_LOG_BACKUP_COUNT = 10
DEFAULT_EVENTS_RETENTION_SIZE = 64 * 1024 * 1024  # 64 MB

logger = logging.getLogger("lifb")


def setup_logging(level: str = "INFO") -> logging.Logger:
    """Attach a rich console handler to the package logger (idempotent)."""
    logger.setLevel(level.upper())
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
    logger.propagate = False
    return logger


def setup_events_logger(full_path: str, events_retention_size: int = DEFAULT_EVENTS_RETENTION_SIZE) -> logging.Logger:
    """Routes EVENT records of `lifb.event` to a rotating events.log under `full_path`."""
    logging.addLevelName(EVENTS_LEVEL_NUM, "EVENT")

    events = logging.getLogger("lifb.event")
    events.setLevel(EVENTS_LEVEL_NUM)
    events.propagate = False

    formatter = logging.Formatter(
        "%(asctime)s | %(levelname)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    target = os.path.abspath(os.path.join(full_path, "events.log"))
    for handler in list(events.handlers):
        if getattr(handler, "baseFilename", None) == target:
            return events
        events.removeHandler(handler)
        handler.close()

    file_handler = RotatingFileHandler(
        target,
        maxBytes=int(events_retention_size),
        backupCount=DEFAULT_LOG_BACKUP_COUNT,
    )
    file_handler.setFormatter(formatter)
    file_handler.setLevel(EVENTS_LEVEL_NUM)
    events.addHandler(file_handler)

    return events


def log_event(message: str):
    """Write an EVENT record if an events logger has been set up."""
    events = logging.getLogger("lifb.event")
    if events.handlers:
        events.log(EVENTS_LEVEL_NUM, message)
