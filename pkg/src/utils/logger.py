"""Logging for canonlab: one configured ``canonlab`` logger, module loggers below it."""

import logging
import sys
from pathlib import Path
from typing import Optional

ROOT_LOGGER_NAME = "canonlab"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _resolve_level(log_level: str) -> int:
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {log_level}")
    return level


def setup_logger(
    name: str = ROOT_LOGGER_NAME,
    log_level: str = "INFO",
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Configure the run logger; the CLI calls this once with values from settings.

    Training and census progress goes to stdout. With ``log_file`` (``CANONLAB_LOG_FILE``)
    the same records are appended to that file, its directory created on demand.
    Calling again replaces the handlers of ``name``.

    Args:
        name: Logger to configure, ``canonlab`` unless a test isolates one
        log_level: Level name such as DEBUG or INFO, case-insensitive
        log_file: Optional log file path

    Returns:
        The configured logger

    Raises:
        ValueError: If the level name is unknown
    """
    level = _resolve_level(log_level)
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers.clear()

    handlers: list = [logging.StreamHandler(sys.stdout)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def get_logger(name: str) -> logging.Logger:
    """Logger for ``name`` placed under the ``canonlab`` namespace (``__name__`` is typical)."""
    if name == ROOT_LOGGER_NAME or name.startswith(ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
