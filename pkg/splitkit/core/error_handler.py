"""Error hierarchy and command-level error handling

Provides:
- SplitkitError and its subclasses, each carrying a stable code and exit code
- handle_errors, the decorator every CLI command runs under
- get_error_response, the JSON error object printed on failure
"""

from functools import wraps
import json
import sys
import traceback
from typing import Callable, Optional

from .logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_VALIDATION = 2
EXIT_PRECONDITION = 3
EXIT_UNSUPPORTED = 4
EXIT_BUDGET = 5
EXIT_INTERNAL = 70


class SplitkitError(Exception):
    """Base of every error splitkit raises on purpose"""

    def __init__(
        self,
        message: str,
        code: str = "SPLITKIT_ERROR",
        exit_code: int = EXIT_INTERNAL,
        details: Optional[dict] = None,
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(SplitkitError):
    """Malformed input: shapes, schema, value ranges"""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        code: str = "VALIDATION_ERROR",
        details: Optional[dict] = None,
    ):
        super().__init__(
            message=message,
            code=code,
            exit_code=EXIT_VALIDATION,
            details=details or {},
        )
        self.field = field
        if field:
            self.details["field"] = field


class DimensionMismatchError(ValidationError):
    """Objects living in different ambient spaces were combined"""

    def __init__(self, expected: int, actual: int, field: Optional[str] = None):
        super().__init__(
            message=f"dimension mismatch: expected {expected}, got {actual}",
            field=field,
            code="DIMENSION_MISMATCH",
            details={"expected": expected, "actual": actual},
        )


class InsufficientSamplesError(ValidationError):
    """Too few samples for the requested statistical procedure"""

    def __init__(self, required: int, actual: int, field: str = "samples"):
        super().__init__(
            message=f"need at least {required} samples, got {actual}",
            field=field,
            code="INSUFFICIENT_SAMPLES",
            details={"required": required, "actual": actual},
        )


class PreconditionError(SplitkitError):
    """A hypothesis of the requested computation does not hold"""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(
            message=message,
            code="PRECONDITION_FAILED",
            exit_code=EXIT_PRECONDITION,
            details=details,
        )


class UnsupportedOperationError(SplitkitError):
    """Operation not available for this kind of input (e.g. continuous xi)"""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(
            message=message,
            code="UNSUPPORTED_OPERATION",
            exit_code=EXIT_UNSUPPORTED,
            details=details,
        )


class BudgetExceededError(SplitkitError):
    """An enumeration would exceed the configured budget"""

    def __init__(self, requested: float, budget: float, what: str = "enumeration"):
        super().__init__(
            message=f"{what} size {requested:g} exceeds budget {budget:g}",
            code="BUDGET_EXCEEDED",
            exit_code=EXIT_BUDGET,
            details={"requested": requested, "budget": budget},
        )


def get_error_response(error: BaseException, user_facing: bool = True) -> dict:
    """The JSON object a failing command prints as its last stderr line.

    Unexpected exceptions become ``INTERNAL_ERROR``; with ``user_facing``
    their text is replaced by a generic message.
    """
    if not isinstance(error, SplitkitError):
        return {
            "success": False,
            "error": "internal error" if user_facing else f"{type(error).__name__}: {error}",
            "code": "INTERNAL_ERROR",
            "exit_code": EXIT_INTERNAL,
        }
    return {
        "success": False,
        "error": error.message,
        "code": error.code,
        "exit_code": error.exit_code,
        "details": error.details,
    }


def _report(payload: dict) -> None:
    print(json.dumps(payload, default=str), file=sys.stderr)


def handle_errors(command: Callable[..., int]) -> Callable[..., int]:
    """Run a CLI command, turning splitkit errors into their exit codes."""

    @wraps(command)
    def run(*args, **kwargs) -> int:
        name = command.__name__
        logger.debug("command_start", command=name)
        try:
            status = command(*args, **kwargs)
        except SplitkitError as e:
            logger.warning(
                "command_failed",
                command=name,
                code=e.code,
                exit_code=e.exit_code,
                reason=e.message,
            )
            _report(get_error_response(e))
            return e.exit_code
        except Exception as e:
            logger.error(
                "command_crashed",
                exc=e,
                command=name,
                error_type=type(e).__name__,
                traceback=traceback.format_exc(),
            )
            _report(get_error_response(e, user_facing=False))
            return EXIT_INTERNAL
        logger.debug("command_done", command=name, exit_code=status)
        return status

    return run
