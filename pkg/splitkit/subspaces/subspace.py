"""Linear subspaces of R^n held as orthonormal bases.

All rank decisions go through a relative tolerance on singular or
eigenvalues; the default comes from ``config.RANK_TOL``.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import linalg

from .. import config
from ..core.error_handler import DimensionMismatchError, ValidationError
from ..core.validators import ArrayValidator

ORTHONORMAL_CHECK = 1e-8
CANONICAL_DECIMALS = 8


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace given by an n x d matrix with orthonormal columns (d may be 0)."""

    basis: np.ndarray
    tol: float = config.RANK_TOL

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim != 2:
            raise ValidationError("basis must be an n x d matrix", "basis", "NOT_A_MATRIX")
        if basis.shape[0] < 1:
            raise ValidationError("ambient dimension must be positive", "basis", "EMPTY")
        if basis.shape[1] > basis.shape[0]:
            raise ValidationError("more basis columns than ambient dimensions", "basis")
        if basis.shape[1] and np.max(np.abs(basis.T @ basis - np.eye(basis.shape[1]))) > max(
            ORTHONORMAL_CHECK, self.tol
        ):
            raise ValidationError("basis columns are not orthonormal", "basis", "NOT_ORTHONORMAL")
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @classmethod
    def zero(cls, n: int, tol: float = config.RANK_TOL) -> "Subspace":
        return cls(np.zeros((n, 0)), tol)

    @classmethod
    def full(cls, n: int, tol: float = config.RANK_TOL) -> "Subspace":
        return cls(np.eye(n), tol)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @cached_property
    def projector(self) -> np.ndarray:
        P = self.basis @ self.basis.T
        P = 0.5 * (P + P.T)
        P.flags.writeable = False
        return P

    @cached_property
    def complement_projector(self) -> np.ndarray:
        Pc = np.eye(self.ambient_dim) - self.projector
        Pc.flags.writeable = False
        return Pc

    def project(self, x) -> np.ndarray:
        """P_S x for a vector, or row-wise for an (m, n) array."""
        x = np.asarray(x, dtype=float)
        return (x @ self.basis) @ self.basis.T

    def project_complement(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - self.project(x)

    def coordinates(self, x) -> np.ndarray:
        """Coordinates of P_S x in this basis (d-vector or (m, d) array)."""
        return np.asarray(x, dtype=float) @ self.basis

    def embed(self, y) -> np.ndarray:
        """Map basis coordinates back into R^n."""
        return np.asarray(y, dtype=float) @ self.basis.T

    def contains(self, x, tol: Optional[float] = None) -> bool:
        x = np.asarray(x, dtype=float)
        tol = tol if tol is not None else max(1e-8, self.tol)
        scale = max(1.0, float(np.linalg.norm(x)))
        return float(np.linalg.norm(self.project_complement(x))) <= tol * scale

    @cached_property
    def canonical_basis(self) -> np.ndarray:
        """Basis that depends only on the subspace, not on the input basis.

        Pivoted QR of the projector; each column is signed so that its first
        entry of magnitude above tolerance is positive.
        """
        if self.dim == 0:
            return self.basis
        q, _, _ = linalg.qr(self.projector, pivoting=True)
        q = q[:, : self.dim].copy()
        for j in range(self.dim):
            col = q[:, j]
            significant = np.flatnonzero(np.abs(col) > 1e-8)
            if significant.size and col[significant[0]] < 0:
                q[:, j] = -col
        q.flags.writeable = False
        return q

    def sort_key(self) -> tuple:
        """Decreasing dimension, then descending lexicographic canonical basis."""
        flat = np.round(self.canonical_basis.T.ravel(), CANONICAL_DECIMALS) + 0.0
        return (-self.dim, tuple(-flat))

    def distance(self, other: "Subspace") -> float:
        """Spectral norm of the projector difference (1 when dims differ)."""
        _check_same_ambient(self, other)
        if self.dim != other.dim:
            return 1.0
        return float(np.linalg.norm(self.projector - other.projector, 2))

    def equals(self, other: "Subspace", tol: Optional[float] = None) -> bool:
        tol = tol if tol is not None else max(1e-8, self.tol)
        return self.ambient_dim == other.ambient_dim and self.distance(other) <= tol

    def to_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "dim": self.dim,
            "basis": [list(map(float, col)) for col in self.canonical_basis.T],
        }

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_same_ambient(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(a.ambient_dim, b.ambient_dim, "ambient_dim")


def subspace_from_spanning_set(
    vectors: Iterable[Sequence[float]],
    tol: float = config.RANK_TOL,
    ambient_dim: Optional[int] = None,
) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    Rank counts singular values above ``tol`` times the largest one. An
    empty family needs ``ambient_dim``.
    """
    vectors = list(vectors)
    if not vectors:
        if ambient_dim is None:
            raise ValidationError("ambient_dim is required for an empty spanning set", "vectors")
        return Subspace.zero(ambient_dim, tol)
    cols = [ArrayValidator.vector(v, ambient_dim, f"vectors[{i}]") for i, v in enumerate(vectors)]
    n = cols[0].shape[0]
    for i, c in enumerate(cols):
        if c.shape[0] != n:
            raise DimensionMismatchError(n, c.shape[0], f"vectors[{i}]")
    return _orthonormal_range(np.column_stack(cols), tol)


def subspace_from_columns(matrix, tol: float = config.RANK_TOL) -> Subspace:
    """Span of the columns of an n x m matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValidationError("expected an n x m matrix", "basis", "NOT_A_MATRIX")
    if matrix.shape[1] == 0:
        return Subspace.zero(matrix.shape[0], tol)
    return _orthonormal_range(matrix, tol)


def _orthonormal_range(matrix: np.ndarray, tol: float) -> Subspace:
    u, s, _ = linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.zero(matrix.shape[0], tol)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(u[:, :rank], tol)


def coordinate_subspace(indices: Iterable[int], n: int, tol: float = config.RANK_TOL) -> Subspace:
    """span{e_i : i in indices} (0-based)."""
    idx = sorted(set(int(i) for i in indices))
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise ValidationError(f"coordinate index outside 0..{n - 1}", "indices", "INDEX_OUT_OF_RANGE")
    return Subspace(np.eye(n)[:, idx], tol)


def complement(S: Subspace) -> Subspace:
    """Orthogonal complement, with P_S + P_{S^perp} = I."""
    n = S.ambient_dim
    if S.dim == 0:
        return Subspace.full(n, S.tol)
    if S.dim == n:
        return Subspace.zero(n, S.tol)
    return Subspace(linalg.null_space(S.basis.T), S.tol)


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    """S1 ∩ S2 as the eigenspace of P1 + P2 for eigenvalue 2 (within tol)."""
    _check_same_ambient(S1, S2)
    tol = max(S1.tol, S2.tol)
    if S1.dim == 0 or S2.dim == 0:
        return Subspace.zero(S1.ambient_dim, tol)
    w, v = linalg.eigh(S1.projector + S2.projector)
    keep = w >= 2.0 - tol
    if not np.any(keep):
        return Subspace.zero(S1.ambient_dim, tol)
    # eigh returns orthonormal eigenvectors; re-orthonormalize the cluster
    q, _ = linalg.qr(v[:, keep], mode="economic")
    return Subspace(q, tol)


def span_of(subspaces: Sequence[Subspace], n: int, tol: float = config.RANK_TOL) -> Subspace:
    """Sum of subspaces."""
    bases = [S.basis for S in subspaces if S.dim > 0]
    if not bases:
        return Subspace.zero(n, tol)
    return subspace_from_columns(np.column_stack(bases), tol)


def sorted_subspaces(subspaces: Iterable[Subspace]) -> list:
    return sorted(subspaces, key=lambda S: S.sort_key())


def random_subspace(n: int, d: int, rng: np.random.Generator, tol: float = config.RANK_TOL) -> Subspace:
    """Haar-random d-dimensional subspace of R^n."""
    if d == 0:
        return Subspace.zero(n, tol)
    q, r = linalg.qr(rng.standard_normal((n, d)), mode="economic")
    return Subspace(q * np.sign(np.diag(r)), tol)
