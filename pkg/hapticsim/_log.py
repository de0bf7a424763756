"""Logging setup shared by the library and the command line.

Library modules only bind component loggers; sinks are configured by the
application through :func:`configure_logging`.
"""

from __future__ import annotations

import sys
from pathlib import Path

from logust import Logger, logger


def get_logger(component: str) -> Logger:
    """Return the shared logger bound to a component name."""
    return logger.bind(component=component)


def configure_logging(
    level: str = "INFO",
    *,
    log_file: str | Path | None = None,
    serialize: bool = False,
    colorize: bool | None = None,
) -> None:
    """Replace all sinks with a stderr sink and an optional JSON file sink.

    Args:
        level: Minimum level for the stderr sink.
        log_file: Optional path; records at DEBUG and above are written there as JSON lines.
        serialize: Emit JSON on stderr instead of the human-readable format.
        colorize: Force or disable ANSI colors on stderr (auto-detected when ``None``).
    """
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), serialize=serialize, colorize=colorize)
    if log_file is not None:
        logger.add(Path(log_file), level="DEBUG", serialize=True, enqueue=False)


def flush_logging() -> None:
    """Block until queued records reach their sinks."""
    logger.complete()
