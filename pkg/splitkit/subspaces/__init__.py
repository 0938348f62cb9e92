"""Subspace algebra: projectors, complements, intersections, chi, the frame
constant and the independent decomposition."""

from .subspace import (
    Subspace,
    subspace_from_spanning_set,
    subspace_from_columns,
    coordinate_subspace,
    complement,
    intersect,
    span_of,
    random_subspace,
)
from .distribution import (
    SubspaceDistribution,
    FrameConstant,
    chi,
    chi_monte_carlo,
    mean_projector,
    point_mass,
    uniform_distribution,
    weighted_distribution,
    bernstein_subspaces,
    bernstein_distribution,
    efron_stein_distribution,
    dks_distribution,
    cover_distribution,
)
from .decomposition import (
    IndependentDecomposition,
    independent_decomposition,
    brute_force_decomposition,
    decompositions_equal,
    check_decomposition,
)
from .margin import SplittingMargin, splitting_margin

__all__ = [
    "Subspace",
    "subspace_from_spanning_set",
    "subspace_from_columns",
    "coordinate_subspace",
    "complement",
    "intersect",
    "span_of",
    "random_subspace",
    "SubspaceDistribution",
    "FrameConstant",
    "chi",
    "chi_monte_carlo",
    "mean_projector",
    "point_mass",
    "uniform_distribution",
    "weighted_distribution",
    "bernstein_subspaces",
    "bernstein_distribution",
    "efron_stein_distribution",
    "dks_distribution",
    "cover_distribution",
    "IndependentDecomposition",
    "independent_decomposition",
    "brute_force_decomposition",
    "decompositions_equal",
    "check_decomposition",
    "SplittingMargin",
    "splitting_margin",
]
