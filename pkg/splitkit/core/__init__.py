"""Core Infrastructure Package

Centralized utilities shared by every module.

Modules:
- logger: Structured logging configuration
- error_handler: Error hierarchy and CLI error handling
- validators: Array and cover validation
- rng: Seed substreams
- stats: Monte Carlo estimates and accumulators
- parallel: Ordered thread-pool fan-out
"""

from .logger import get_logger
from .error_handler import (
    SplitkitError,
    ValidationError,
    DimensionMismatchError,
    InsufficientSamplesError,
    PreconditionError,
    UnsupportedOperationError,
    BudgetExceededError,
    handle_errors,
    get_error_response,
)
from .validators import ArrayValidator, CoverValidator
from .rng import substream, child_seed, as_generator
from .stats import (
    MonteCarloEstimate,
    MomentAccumulator,
    mean_with_se,
    variance_with_se,
    covariance_with_se,
)
from .parallel import run_tasks, chunk_sizes

__all__ = [
    "get_logger",
    "SplitkitError",
    "ValidationError",
    "DimensionMismatchError",
    "InsufficientSamplesError",
    "PreconditionError",
    "UnsupportedOperationError",
    "BudgetExceededError",
    "handle_errors",
    "get_error_response",
    "ArrayValidator",
    "CoverValidator",
    "substream",
    "child_seed",
    "as_generator",
    "MonteCarloEstimate",
    "MomentAccumulator",
    "mean_with_se",
    "variance_with_se",
    "covariance_with_se",
    "run_tasks",
    "chunk_sizes",
]
