"""splitkit: subspace splitting, the linear Boltzmann collision process and
verification of the variance and entropy inequalities attached to a
distribution of subspaces.

Subpackages:
- subspaces: subspace algebra, xi, the frame constant, the decomposition
- measures: sampleable measures and splitting tests
- dynamics: collision simulation, generator, moments, relative entropy
- inequalities: checks, SlackReports and the suite runner
- cli: scene files and the ``splitkit`` command
"""

__version__ = "0.1.0"

from .core.error_handler import (
    SplitkitError,
    ValidationError,
    DimensionMismatchError,
    InsufficientSamplesError,
    PreconditionError,
    UnsupportedOperationError,
    BudgetExceededError,
)
from .subspaces import (
    Subspace,
    SubspaceDistribution,
    subspace_from_spanning_set,
    subspace_from_columns,
    coordinate_subspace,
    complement,
    intersect,
    chi,
    mean_projector,
    weighted_distribution,
    uniform_distribution,
    independent_decomposition,
    splitting_margin,
)
from .measures import (
    GaussianMeasure,
    GaussianSpec,
    ProductSpec,
    MixtureSpec,
    EmpiricalSpec,
    CustomSpec,
    splits_along,
    splits_wrt,
    covariance_split_defect,
    empirical_split_test,
    log_moment_status,
)
from .functions import build_function
from .dynamics import (
    CollisionScene,
    simulate,
    generator_apply,
    reversibility_check,
    moment_evolution,
    nu_t_density,
    kl_to_gaussian,
    dv_lower_bound,
)
from .inequalities import SlackReport, run_suite, tail_ratio_diagnostic

__all__ = [
    "__version__",
    "SplitkitError",
    "ValidationError",
    "DimensionMismatchError",
    "InsufficientSamplesError",
    "PreconditionError",
    "UnsupportedOperationError",
    "BudgetExceededError",
    "Subspace",
    "SubspaceDistribution",
    "subspace_from_spanning_set",
    "subspace_from_columns",
    "coordinate_subspace",
    "complement",
    "intersect",
    "chi",
    "mean_projector",
    "weighted_distribution",
    "uniform_distribution",
    "independent_decomposition",
    "splitting_margin",
    "GaussianMeasure",
    "GaussianSpec",
    "ProductSpec",
    "MixtureSpec",
    "EmpiricalSpec",
    "CustomSpec",
    "splits_along",
    "splits_wrt",
    "covariance_split_defect",
    "empirical_split_test",
    "log_moment_status",
    "build_function",
    "CollisionScene",
    "simulate",
    "generator_apply",
    "reversibility_check",
    "moment_evolution",
    "nu_t_density",
    "kl_to_gaussian",
    "dv_lower_bound",
    "SlackReport",
    "run_suite",
    "tail_ratio_diagnostic",
]
