"""Input validation for arrays and index families

Validators coerce their input to float arrays and raise ValidationError
naming the offending field. They never mutate the caller's data.
"""

from typing import Iterable, List, Optional, Sequence

import numpy as np

from .error_handler import (
    DimensionMismatchError,
    InsufficientSamplesError,
    ValidationError,
)

WEIGHT_SUM_TOL = 1e-12
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10


class ArrayValidator:
    """Validates vectors, matrices and sample arrays"""

    @classmethod
    def vector(cls, value, dim: Optional[int] = None, field: str = "vector") -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 1:
            raise ValidationError(
                f"expected a 1-d vector, got shape {arr.shape}", field, "NOT_A_VECTOR"
            )
        if dim is not None and arr.shape[0] != dim:
            raise DimensionMismatchError(dim, arr.shape[0], field)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("vector has non-finite entries", field, "NON_FINITE")
        return arr

    @classmethod
    def matrix(
        cls,
        value,
        shape: Optional[Sequence[Optional[int]]] = None,
        field: str = "matrix",
    ) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2:
            raise ValidationError(
                f"expected a 2-d matrix, got shape {arr.shape}", field, "NOT_A_MATRIX"
            )
        if shape is not None:
            for axis, expected in enumerate(shape):
                if expected is not None and arr.shape[axis] != expected:
                    raise DimensionMismatchError(expected, arr.shape[axis], field)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix has non-finite entries", field, "NON_FINITE")
        return arr

    @classmethod
    def covariance(cls, value, dim: Optional[int] = None, field: str = "cov") -> np.ndarray:
        """Symmetric positive-semidefinite within tolerance; returns the symmetrized matrix"""
        arr = cls.matrix(value, (dim, dim), field)
        if arr.shape[0] != arr.shape[1]:
            raise ValidationError("covariance must be square", field, "NOT_SQUARE")
        scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
        if np.max(np.abs(arr - arr.T), initial=0.0) > SYMMETRY_TOL * scale:
            raise ValidationError("covariance must be symmetric", field, "NOT_SYMMETRIC")
        sym = 0.5 * (arr + arr.T)
        if sym.size and np.linalg.eigvalsh(sym)[0] < -PSD_TOL * scale:
            raise ValidationError(
                "covariance must be positive semidefinite", field, "NOT_PSD"
            )
        return sym

    @classmethod
    def weights(cls, value, count: Optional[int] = None, field: str = "weights") -> np.ndarray:
        arr = cls.vector(value, count, field)
        if arr.size == 0:
            raise ValidationError("at least one weight is required", field, "EMPTY")
        if np.any(arr <= 0):
            raise ValidationError("weights must be positive", field, "NON_POSITIVE")
        if abs(arr.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 (got {arr.sum():.15g})", field, "NOT_NORMALIZED"
            )
        return arr

    @classmethod
    def samples(
        cls,
        value,
        dim: Optional[int] = None,
        min_rows: int = 1,
        field: str = "samples",
    ) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 1 and dim in (None, 1):
            arr = arr[:, None]
        arr = cls.matrix(arr, (None, dim), field)
        if arr.shape[0] < min_rows:
            raise InsufficientSamplesError(min_rows, arr.shape[0], field)
        return arr

    @classmethod
    def probability(cls, value: float, field: str, open_interval: bool = True) -> float:
        value = float(value)
        ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
        if not ok:
            raise ValidationError(f"{field} must lie in (0, 1), got {value}", field, "OUT_OF_RANGE")
        return value

    @classmethod
    def positive(cls, value: float, field: str) -> float:
        value = float(value)
        if not value > 0:
            raise ValidationError(f"{field} must be positive, got {value}", field, "NON_POSITIVE")
        return value

    @classmethod
    def count(cls, value: int, field: str, minimum: int = 1) -> int:
        if int(value) != value or value < minimum:
            raise ValidationError(
                f"{field} must be an integer >= {minimum}, got {value}", field, "OUT_OF_RANGE"
            )
        return int(value)


class CoverValidator:
    """Validates a family of index subsets of {0, ..., n-1} as an r-cover"""

    @classmethod
    def validate(
        cls, cover: Iterable[Iterable[int]], n: int, r: int, field: str = "cover"
    ) -> dict:
        """
        Check that every index appears in at most r members.

        Returns:
            Dict with the normalized cover (sorted tuples), per-index counts and
            the list of indices appearing in no member.
        """
        members: List[tuple] = []
        for i, member in enumerate(cover):
            idx = tuple(sorted(int(j) for j in member))
            if not idx:
                raise ValidationError(f"member {i} is empty", field, "EMPTY_MEMBER")
            if len(set(idx)) != len(idx):
                raise ValidationError(f"member {i} repeats an index", field, "DUPLICATE_INDEX")
            if idx[0] < 0 or idx[-1] >= n:
                raise ValidationError(
                    f"member {i} has an index outside 0..{n - 1}", field, "INDEX_OUT_OF_RANGE"
                )
            members.append(idx)
        if not members:
            raise ValidationError("cover has no members", field, "EMPTY")

        counts = np.zeros(n, dtype=int)
        for idx in members:
            counts[list(idx)] += 1
        if counts.max() > r:
            worst = int(np.argmax(counts))
            raise ValidationError(
                f"index {worst} appears in {counts[worst]} members, more than r={r}",
                field,
                "NOT_AN_R_COVER",
                details={"index": worst, "count": int(counts[worst]), "r": r},
            )
        uncovered = [int(j) for j in np.flatnonzero(counts == 0)]
        return {"members": members, "counts": counts, "uncovered": uncovered}
