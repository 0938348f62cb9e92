"""Gaussian measures, possibly degenerate, and their closed-form relative entropy."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..core.error_handler import DimensionMismatchError, ValidationError
from ..core.validators import ArrayValidator
from ..subspaces.subspace import Subspace

RANGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    """N(mean, cov) with cov symmetric positive semidefinite."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = ArrayValidator.vector(self.mean, field="mean")
        cov = ArrayValidator.covariance(self.cov, mean.shape[0], field="cov")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def standard(cls, n: int) -> "GaussianMeasure":
        return cls(np.zeros(n), np.eye(n))

    @classmethod
    def isotropic(cls, mean, variance: float = 1.0) -> "GaussianMeasure":
        mean = np.asarray(mean, dtype=float)
        return cls(mean, variance * np.eye(mean.shape[0]))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def _eig(self):
        w, v = linalg.eigh(self.cov)
        return np.clip(w, 0.0, None), v

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draws via the clipped eigendecomposition, so singular covariances are fine."""
        w, v = self._eig()
        z = rng.standard_normal((count, self.dim))
        return self.mean + (z * np.sqrt(w)) @ v.T

    def range_basis(self, tol: float = RANGE_TOL) -> np.ndarray:
        """Orthonormal basis of range(cov)."""
        w, v = self._eig()
        scale = max(1.0, float(w[-1])) if w.size else 1.0
        return v[:, w > tol * scale]

    def logpdf(self, x) -> np.ndarray:
        """Log density w.r.t. Lebesgue measure; needs a nonsingular covariance."""
        x = np.asarray(x, dtype=float)
        c, lower = linalg.cho_factor(self.cov, lower=True)
        diff = np.atleast_2d(x - self.mean)
        sol = linalg.solve_triangular(c, diff.T, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diag(c)))
        out = -0.5 * (np.sum(sol**2, axis=0) + logdet + self.dim * np.log(2 * np.pi))
        return out if x.ndim > 1 else out[0]

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "mean": self.mean.tolist(), "cov": self.cov.tolist()}


def _same_range(bp: np.ndarray, bq: np.ndarray, tol: float) -> bool:
    if bp.shape[1] != bq.shape[1]:
        return False
    if bp.shape[1] == 0:
        return True
    return float(np.linalg.norm(bp - bq @ (bq.T @ bp))) <= tol


def gaussian_kl(p: GaussianMeasure, q: GaussianMeasure, tol: float = 1e-9) -> float:
    """D(p || q) in closed form; ``inf`` when p is not absolutely continuous w.r.t. q.

    Absolute continuity holds iff range(cov_p) = range(cov_q) and the mean
    difference lies in that range. The divergence is then computed in an
    orthonormal basis of the common range.
    """
    if p.dim != q.dim:
        raise DimensionMismatchError(q.dim, p.dim, "p")
    bp = p.range_basis()
    bq = q.range_basis()
    diff = q.mean - p.mean
    scale = max(1.0, float(np.linalg.norm(diff)))
    if not _same_range(bp, bq, 1e-7):
        return float("inf")
    if np.linalg.norm(diff - bq @ (bq.T @ diff)) > 1e-7 * scale:
        return float("inf")
    r = bq.shape[1]
    if r == 0:
        return 0.0
    sp = bq.T @ p.cov @ bq
    sq = bq.T @ q.cov @ bq
    d = bq.T @ diff
    factor = linalg.cho_factor(sq)
    trace_term = float(np.trace(linalg.cho_solve(factor, sp)))
    mahalanobis = float(d @ linalg.cho_solve(factor, d))
    logdet_q = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    sign_p, logdet_p = np.linalg.slogdet(sp)
    if sign_p <= 0:
        return float("inf")
    value = 0.5 * (trace_term + mahalanobis - r + logdet_q - logdet_p)
    return 0.0 if value < tol else float(value)


def marginal_gaussian(g: GaussianMeasure, S: Subspace) -> GaussianMeasure:
    """Law of the basis coordinates of P_S X, X ~ g."""
    if S.ambient_dim != g.dim:
        raise DimensionMismatchError(g.dim, S.ambient_dim, "S")
    B = S.basis
    return GaussianMeasure(B.T @ g.mean, B.T @ g.cov @ B)


def split_cross_norm(cov: np.ndarray, S: Subspace) -> float:
    """Spectral norm of P_S cov P_{S^perp}."""
    return float(np.linalg.norm(S.projector @ cov @ S.complement_projector, 2))
