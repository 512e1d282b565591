"""Structured logging for fluxqit.

Events go to standard error so that standard output only carries the summary
lines of the command line. Core modules log through ``get_logger(<module>)``
with snake_case event names and keyword fields.
"""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any
from uuid import uuid4

import numpy as np
import structlog
from structlog.types import EventDict, Processor, WrappedLogger

from fluxqit.models.enums import LogFormat, LogLevel

_VERBOSITY = (LogLevel.INFO, LogLevel.DEBUG)


def level_for(verbose: int, configured: LogLevel = LogLevel.WARNING) -> LogLevel:
    """Level after ``-v`` flags: none keeps ``configured``, one is INFO, two or more DEBUG."""
    if verbose <= 0:
        return configured
    return _VERBOSITY[min(verbose, len(_VERBOSITY)) - 1]


def _plain_numbers(logger: WrappedLogger, method_name: str, event_dict: EventDict) -> EventDict:
    # numpy scalars and small arrays would otherwise render as reprs
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray) and value.size <= 16:
            event_dict[key] = value.tolist()
    return event_dict


def setup_logging(
    level: LogLevel = LogLevel.WARNING,
    log_format: LogFormat = LogFormat.TEXT,
    log_file: str | None = None,
    max_size_mb: int = 20,
    backup_count: int = 3,
) -> None:
    """Configure structlog and the root logger.

    Calling it again replaces the handlers of the previous call, so the
    command group can set a default level before the run document is read.

    Args:
        level: Log level
        log_format: ``text`` for the console renderer, ``json`` for one object per line
        log_file: Rotating log file (optional)
        max_size_mb: Size at which the log file rotates
        backup_count: Rotated files to keep
    """
    shared_processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        _plain_numbers,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]

    renderer: Processor
    if log_format == LogFormat.JSON:
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())

    structlog.configure(
        processors=[*shared_processors, structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )

    formatter = structlog.stdlib.ProcessorFormatter(
        processor=renderer,
        foreign_pre_chain=shared_processors,
    )

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                path,
                maxBytes=max_size_mb * 1024 * 1024,
                backupCount=backup_count,
                encoding="utf-8",
            )
        )

    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)
        handler.close()
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(getattr(logging, level.value))


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Structured logger, named after the module that uses it."""
    return structlog.get_logger(name)


@contextmanager
def log_operation(operation: str, **context: Any) -> Iterator[str]:
    """Bind ``operation`` and a fresh ``run_id`` to every event inside the block.

    Yields the run id.
    """
    run_id = uuid4().hex[:8]
    with structlog.contextvars.bound_contextvars(operation=operation, run_id=run_id, **context):
        yield run_id
