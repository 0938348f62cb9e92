"""Distributions over subspaces, the function chi and the frame constant."""

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import linalg

from .. import config
from ..core.error_handler import DimensionMismatchError, UnsupportedOperationError, ValidationError
from ..core.logger import get_logger
from ..core.rng import SeedLike, as_generator
from ..core.stats import MonteCarloEstimate, mean_with_se
from ..core.validators import ArrayValidator, CoverValidator
from .subspace import Subspace, coordinate_subspace

logger = get_logger(__name__)

EIGEN_CLUSTER_TOL = 1e-9

SubspaceSampler = Callable[[np.random.Generator], Subspace]


@dataclass(frozen=True, eq=False)
class SubspaceDistribution:
    """Discrete distribution over subspaces (atoms + weights), or a sampler.

    A continuous distribution has no atoms; only ``chi_monte_carlo`` and
    ``sample_subspaces`` are available for it.
    """

    ambient_dim: int
    atoms: tuple = ()
    weights: Optional[np.ndarray] = None
    sampler: Optional[SubspaceSampler] = None

    def __post_init__(self):
        atoms = tuple(self.atoms)
        for i, atom in enumerate(atoms):
            if atom.ambient_dim != self.ambient_dim:
                raise DimensionMismatchError(self.ambient_dim, atom.ambient_dim, f"atoms[{i}]")
        object.__setattr__(self, "atoms", atoms)
        if self.sampler is None:
            if not atoms:
                raise ValidationError("a discrete distribution needs at least one atom", "atoms", "EMPTY")
            weights = ArrayValidator.weights(self.weights, len(atoms))
            weights.flags.writeable = False
            object.__setattr__(self, "weights", weights)
        elif atoms:
            raise ValidationError("a sampler-based distribution cannot also list atoms", "atoms")

    @classmethod
    def from_sampler(cls, ambient_dim: int, sampler: SubspaceSampler) -> "SubspaceDistribution":
        return cls(ambient_dim=ambient_dim, sampler=sampler)

    @property
    def continuous(self) -> bool:
        return self.sampler is not None

    @property
    def size(self) -> int:
        return len(self.atoms)

    def require_discrete(self, operation: str) -> None:
        if self.continuous:
            raise UnsupportedOperationError(
                f"{operation} needs a discrete subspace distribution",
                details={"operation": operation},
            )

    def sample_atoms(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Atom indices drawn from the weights."""
        self.require_discrete("sample_atoms")
        if self.size == 1:
            return np.zeros(count, dtype=np.int64)
        return rng.choice(self.size, size=count, p=self.weights)

    def sample_subspaces(self, rng: np.random.Generator, count: int) -> list:
        if self.continuous:
            return [self.sampler(rng) for _ in range(count)]
        return [self.atoms[i] for i in self.sample_atoms(rng, count)]

    def to_dict(self) -> dict:
        if self.continuous:
            return {"ambient_dim": self.ambient_dim, "continuous": True}
        return {
            "ambient_dim": self.ambient_dim,
            "atoms": [
                {"weight": float(w), **S.to_dict()} for S, w in zip(self.atoms, self.weights)
            ],
        }


@dataclass(frozen=True)
class FrameConstant:
    """Mean projector Q, lambda = 1 - lambda_max(Q) and a top eigenvector u."""

    Q: np.ndarray
    lam: float
    top_eigenvector: np.ndarray
    eigenvalues: np.ndarray

    @property
    def top_eigenvalue(self) -> float:
        return 1.0 - self.lam


def _min_norms(S: Subspace, x: np.ndarray) -> np.ndarray:
    inside = S.project(x)
    a = np.linalg.norm(inside, axis=-1)
    b = np.linalg.norm(x - inside, axis=-1)
    return np.minimum(a, b)


def chi(xi: SubspaceDistribution, x) -> float:
    """Weighted average over atoms of min(|P_E x|, |P_{E^perp} x|).

    Accepts a single n-vector or an (m, n) array (returns m values).
    """
    xi.require_discrete("chi")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != xi.ambient_dim:
        raise DimensionMismatchError(xi.ambient_dim, x.shape[-1], "x")
    total = np.zeros(x.shape[:-1])
    for S, w in zip(xi.atoms, xi.weights):
        total = total + w * _min_norms(S, x)
    return float(total) if total.ndim == 0 else total


def chi_monte_carlo(
    xi: SubspaceDistribution, x, n_samples: int = 10_000, seed: SeedLike = 0
) -> MonteCarloEstimate:
    """Monte Carlo chi for distributions given by a sampler (or any distribution)."""
    x = ArrayValidator.vector(x, xi.ambient_dim, "x")
    rng = as_generator(seed, "chi")
    values = np.array([_min_norms(S, x) for S in xi.sample_subspaces(rng, n_samples)])
    return mean_with_se(values)


def mean_projector(xi: SubspaceDistribution) -> FrameConstant:
    """Q = sum_i w_i P_{E_i}, lambda = 1 - lambda_max(Q).

    When the top eigenvalue is repeated, the reported eigenvector is the
    normalized projection onto the top eigenspace of the first coordinate
    vector e_1, e_2, ... with a non-vanishing projection.
    """
    xi.require_discrete("mean_projector")
    n = xi.ambient_dim
    Q = np.zeros((n, n))
    for S, w in zip(xi.atoms, xi.weights):
        Q += w * S.projector
    Q = 0.5 * (Q + Q.T)
    w, v = linalg.eigh(Q)
    top = float(w[-1])
    cluster = v[:, w >= top - EIGEN_CLUSTER_TOL]
    u = None
    for j in range(n):
        proj = cluster @ cluster[j, :]
        norm = np.linalg.norm(proj)
        if norm > 1e-6:
            u = proj / norm
            break
    lam = float(np.clip(1.0 - top, 0.0, 1.0))
    logger.debug("mean_projector", n=n, atoms=xi.size, lam=lam)
    Q.flags.writeable = False
    return FrameConstant(Q=Q, lam=lam, top_eigenvector=u, eigenvalues=w)


def point_mass(S: Subspace) -> SubspaceDistribution:
    return SubspaceDistribution(S.ambient_dim, (S,), np.ones(1))


def uniform_distribution(subspaces: Sequence[Subspace]) -> SubspaceDistribution:
    subspaces = list(subspaces)
    if not subspaces:
        raise ValidationError("need at least one subspace", "atoms", "EMPTY")
    return SubspaceDistribution(
        subspaces[0].ambient_dim, tuple(subspaces), np.full(len(subspaces), 1.0 / len(subspaces))
    )


def weighted_distribution(subspaces: Sequence[Subspace], weights) -> SubspaceDistribution:
    """Atoms with weights normalized to sum to one."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise ValidationError("weights must be positive", "weights", "NON_POSITIVE")
    subspaces = list(subspaces)
    return SubspaceDistribution(subspaces[0].ambient_dim, tuple(subspaces), weights / weights.sum())


def bernstein_subspaces(m: int = 1, a: float = 1.0, b: float = 1.0) -> tuple:
    """E1 = {(x, 0)} and E2 = {(a x, b x)} in R^{2m}, x in R^m."""
    if a == 0 or b == 0:
        raise ValidationError("a and b must be nonzero", "bernstein")
    eye = np.eye(m)
    e1 = Subspace(np.vstack([eye, np.zeros((m, m))]))
    e2 = Subspace(np.vstack([a * eye, b * eye]) / np.hypot(a, b))
    return e1, e2


def bernstein_distribution(m: int = 1, a: float = 1.0, b: float = 1.0) -> SubspaceDistribution:
    return uniform_distribution(bernstein_subspaces(m, a, b))


def efron_stein_distribution(k: int) -> SubspaceDistribution:
    """Uniform over E_i = span{e_j : j != i}, i = 1..k."""
    if k < 2:
        raise ValidationError("k must be at least 2", "k", "OUT_OF_RANGE")
    return uniform_distribution([coordinate_subspace([j for j in range(k) if j != i], k) for i in range(k)])


def dks_distribution(n: int, m: int) -> SubspaceDistribution:
    """Uniform over all m-coordinate spans of R^n, so Q = (m/n) I."""
    if not 1 <= m <= n:
        raise ValidationError("need 1 <= m <= n", "m", "OUT_OF_RANGE")
    return uniform_distribution([coordinate_subspace(c, n) for c in combinations(range(n), m)])


def cover_distribution(
    cover: Iterable[Iterable[int]], n: int, weights=None, r: Optional[int] = None
) -> SubspaceDistribution:
    """Coordinate spans of the members of a cover of {0..n-1}."""
    members = [tuple(sorted(set(int(i) for i in c))) for c in cover]
    if r is not None:
        CoverValidator.validate(members, n, r)
    atoms = [coordinate_subspace(c, n) for c in members]
    if weights is None:
        return uniform_distribution(atoms)
    return weighted_distribution(atoms, weights)
