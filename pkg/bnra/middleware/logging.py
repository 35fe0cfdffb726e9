"""
Structured logging for command invocations
"""
import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator
from uuid import uuid4

import structlog

from bnra.config import settings


def configure_logging() -> None:
    """Configure structlog on stderr; stdout is reserved for JSON results"""
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.JSONRenderer() if settings.log_json else structlog.dev.ConsoleRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, settings.log_level, logging.INFO)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


configure_logging()

logger = structlog.get_logger()


@contextmanager
def invocation_logging(command: str) -> Iterator[None]:
    """
    Bind an invocation id and log start, completion or failure with timing
    """
    invocation_id = str(uuid4())
    start_time = time.time()

    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(invocation_id=invocation_id, command=command)
    logger.info("command_started")
    try:
        yield
    except Exception as e:
        duration = time.time() - start_time
        logger.error(
            "command_failed",
            error=str(e),
            error_type=type(e).__name__,
            duration_ms=round(duration * 1000, 2),
        )
        raise
    else:
        duration = time.time() - start_time
        logger.info("command_completed", duration_ms=round(duration * 1000, 2))
