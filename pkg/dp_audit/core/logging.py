"""
Structured logging configuration for the audit toolkit.

Log lines go to stderr so that reports printed on stdout stay
machine-readable. A command binds its run context (command name, base seed)
once; every line logged afterwards carries it, which is what makes a logged
result reproducible from the log alone.
"""

import logging
import sys
import time
from contextlib import contextmanager
from typing import Any, Callable, Iterator, Mapping, MutableMapping, cast

import structlog
from structlog.stdlib import LoggerFactory

from .errors import IngestionError, NotSpdError

StructlogProcessor = Callable[
    [Any, str, MutableMapping[str, Any]],
    Mapping[str, Any] | str | bytes | bytearray | tuple[Any, ...],
]

LOG_FORMATS = ("json", "text")


def setup_logging(log_level: str, log_format: str) -> None:
    """
    Configure structured logging for the application.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_format: Log format (json or text)
    """
    if not log_level or not log_format:
        raise ValueError(
            "log_level and log_format must be provided to setup_logging"
        )
    if log_format.lower() not in LOG_FORMATS:
        raise ValueError(f"log_format must be one of {LOG_FORMATS}")
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, log_level.upper()),
        force=True,
    )

    processors: list[StructlogProcessor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.format_exc_info,
    ]
    if log_format.lower() == "json":
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=False))

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Structured logger for a module (pass __name__)."""
    return cast(structlog.stdlib.BoundLogger, structlog.get_logger(name))


def bind_run_context(command: str, seed: int, **kwargs: Any) -> None:
    """Attach the command and base seed to every following log line."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(
        command=command, seed=seed, **kwargs
    )


def log_performance(
    logger: structlog.stdlib.BoundLogger, operation: str, **kwargs: Any
) -> None:
    """
    Log performance metrics for operations.

    Args:
        logger: Structured logger instance
        operation: Operation name
        **kwargs: Additional performance metrics
    """
    logger.info("Performance metric", operation=operation, **kwargs)


@contextmanager
def timed(
    logger: structlog.stdlib.BoundLogger, operation: str, **kwargs: Any
) -> Iterator[None]:
    """Time the enclosed block and report it through log_performance."""
    start = time.perf_counter()
    try:
        yield
    finally:
        log_performance(
            logger,
            operation,
            elapsed_seconds=round(time.perf_counter() - start, 6),
            **kwargs,
        )


def error_context(error: Exception) -> dict[str, Any]:
    """Structured fields describing an error, including data locations."""
    context: dict[str, Any] = {
        "error_type": type(error).__name__,
        "error_message": str(error),
    }
    if isinstance(error, IngestionError):
        if error.row is not None:
            context["row"] = error.row
        if error.column is not None:
            context["column"] = error.column
    elif isinstance(error, NotSpdError):
        context["condition"] = error.condition
    return context


def log_error(
    logger: structlog.stdlib.BoundLogger,
    error: Exception,
    context: dict[str, Any] | None = None,
) -> None:
    """Log an error with its structured context."""
    fields = error_context(error)
    if context:
        fields.update(context)
    logger.error("Error occurred", **fields)
