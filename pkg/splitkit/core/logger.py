"""JSON logs on stderr for the splitkit package

stdout carries command results only. Each log line is a single JSON
object with timestamp, level, logger and message, followed by whatever
keyword context the call site supplied (numpy values are converted).
Set SPLITKIT_LOG_FORMAT=text for human-readable lines instead.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from .. import config

try:
    from pythonjsonlogger import jsonlogger
except ImportError:
    jsonlogger = None

PACKAGE_LOGGER = "splitkit"
TEXT_FORMAT = "[%(levelname)s] %(asctime)s - %(name)s - %(message)s"

_configured = False


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat()


class ContextualJsonFormatter(logging.Formatter):
    """Plain-stdlib fallback used when python-json-logger is missing."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "timestamp": _stamp(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update(getattr(record, "extra_data", {}))
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=_jsonable)


def _json_formatter() -> logging.Formatter:
    if jsonlogger is None:
        return ContextualJsonFormatter()

    class _RunContextFormatter(jsonlogger.JsonFormatter):
        def add_fields(self, log_record, record, message_dict):
            super().add_fields(log_record, record, message_dict)
            log_record["timestamp"] = _stamp()
            log_record["level"] = record.levelname
            log_record.update(getattr(record, "extra_data", {}))

    return _RunContextFormatter(
        fmt="%(name)s %(message)s",
        rename_fields={"name": "logger"},
        json_default=_jsonable,
    )


def configure_logging(
    level: Optional[str] = None,
    fmt: Optional[str] = None,
    force: bool = False,
) -> logging.Logger:
    """Install one stderr handler on the package logger.

    Runs at import with the values from ``splitkit.config``; call again
    with ``force=True`` to switch level or format.
    """
    global _configured
    package = logging.getLogger(PACKAGE_LOGGER)
    if _configured and not force:
        return package

    package.setLevel(level or config.LOG_LEVEL)
    package.propagate = False
    package.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    if (fmt or config.LOG_FORMAT) == "text":
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))
    else:
        handler.setFormatter(_json_formatter())
    package.addHandler(handler)

    _configured = True
    return package


class StructuredLogger:
    """Event-name logging: ``log.info("simulate_done", n_paths=1000)``."""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def _emit(self, level: int, event: str, exc_info=None, **context):
        if not self.logger.isEnabledFor(level):
            return
        record = self.logger.makeRecord(
            self.logger.name, level, "(unknown file)", 0, event, (), exc_info
        )
        record.extra_data = context
        self.logger.handle(record)

    def debug(self, event: str, **context):
        self._emit(logging.DEBUG, event, **context)

    def info(self, event: str, **context):
        self._emit(logging.INFO, event, **context)

    def warning(self, event: str, **context):
        self._emit(logging.WARNING, event, **context)

    def error(self, event: str, exc: Optional[BaseException] = None, **context):
        exc_info = (type(exc), exc, exc.__traceback__) if exc is not None else None
        self._emit(logging.ERROR, event, exc_info, **context)


configure_logging()


def get_logger(name: str) -> StructuredLogger:
    return StructuredLogger(logging.getLogger(name))
