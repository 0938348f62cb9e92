"""Exact first and second moments of V_t for Gaussian bath and initial law.

With W = V - m_bath, one collision maps E[W] to Q E[W] and the raw second
moment M = E[W W^T] to sum_E w_E (P_E M P_E + P_{E^perp} Sigma_bath P_{E^perp}).
Under the Poisson clock this gives the linear ODE

    dM/dt = rate * (J(M) - M),

integrated with RK45 at tight tolerances; ``exact_moment_evolution``
solves the same system through an augmented matrix exponential.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from .. import config
from ..core.error_handler import PreconditionError, ValidationError
from ..core.logger import get_logger
from ..core.parallel import chunk_sizes, run_tasks
from ..core.rng import substream
from ..core.stats import MonteCarloEstimate, nested_moments
from ..functions import LinearFunctional, as_test_function
from ..subspaces.distribution import mean_projector
from .collision import CollisionScene, _run_chunk

logger = get_logger(__name__)

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class MomentEvolution:
    """Mean and covariance of V_t at the query times."""

    times: np.ndarray
    Q: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    bath_mean: np.ndarray
    initial_mean: np.ndarray
    rate: float = 1.0

    def mean_fn(self, t: float) -> np.ndarray:
        """Closed form m_b + exp(rate t (Q - I)) (theta_0 - m_b) at any t."""
        n = self.Q.shape[0]
        return self.bath_mean + linalg.expm(self.rate * t * (self.Q - np.eye(n))) @ (
            self.initial_mean - self.bath_mean
        )

    def cov_fn(self, t: float) -> np.ndarray:
        """Covariance at one of the query times."""
        matches = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-12))
        if matches.size == 0:
            raise ValidationError(f"t={t} is not a query time", "t")
        return self.cov[matches[0]]

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "Q": self.Q.tolist(),
            "rate": self.rate,
        }


def _gaussian_inputs(scene: CollisionScene):
    scene.xi.require_discrete("moment_evolution")
    bath = scene.bath.gaussian()
    initial = scene.initial.gaussian()
    if bath is None or initial is None:
        raise PreconditionError(
            "moment evolution needs Gaussian bath and initial laws",
            details={"bath": scene.bath.kind, "initial": scene.initial.kind},
        )
    return bath, initial


def _jump_terms(scene: CollisionScene, bath_cov: np.ndarray):
    n = scene.dim
    kron = np.zeros((n * n, n * n))
    forcing = np.zeros((n, n))
    for S, w in zip(scene.xi.atoms, scene.xi.weights):
        kron += w * np.kron(S.projector, S.projector)
        forcing += w * S.complement_projector @ bath_cov @ S.complement_projector
    return kron, forcing


def _query_times(times: Iterable[float]) -> np.ndarray:
    times = np.asarray(list(times), dtype=float)
    if times.size == 0:
        raise ValidationError("at least one query time is required", "times", "EMPTY")
    if np.any(times < 0):
        raise ValidationError("query times must be nonnegative", "times", "NEGATIVE_TIME")
    return times


def moment_evolution(scene: CollisionScene, times: Iterable[float]) -> MomentEvolution:
    """Mean (closed form) and covariance (ODE) of V_t at ``times``."""
    times = _query_times(times)
    bath, initial = _gaussian_inputs(scene)
    n = scene.dim
    Q = mean_projector(scene.xi).Q
    kron, forcing = _jump_terms(scene, bath.cov)
    rate = scene.rate

    w0 = initial.mean - bath.mean
    M0 = initial.cov + np.outer(w0, w0)

    def rhs(_t, y):
        return rate * (kron @ y + forcing.ravel() - y)

    # t_eval must be strictly increasing
    unique, slot_of = np.unique(times, return_inverse=True)
    t_max = float(unique[-1])
    if t_max > 0:
        sol = solve_ivp(rhs, (0.0, t_max), M0.ravel(), method="RK45", t_eval=unique, rtol=RTOL, atol=ATOL)
        if not sol.success:
            raise PreconditionError(f"moment integration failed: {sol.message}")
        raw = sol.y.T.reshape(-1, n, n)
    else:
        raw = np.repeat(M0[None, :, :], len(unique), axis=0)

    means = np.empty((len(times), n))
    covs = np.empty((len(times), n, n))
    for idx, (t, slot) in enumerate(zip(times, slot_of)):
        wt = linalg.expm(rate * t * (Q - np.eye(n))) @ w0
        cov = raw[slot] - np.outer(wt, wt)
        means[idx] = bath.mean + wt
        covs[idx] = 0.5 * (cov + cov.T)
    logger.debug("moment_evolution", n=n, times=len(times))
    return MomentEvolution(times, Q, means, covs, bath.mean.copy(), initial.mean.copy(), rate)


def exact_moment_evolution(scene: CollisionScene, times: Iterable[float]) -> MomentEvolution:
    """Same quantities through the exponential of the augmented (n^2 + 1) system."""
    times = _query_times(times)
    bath, initial = _gaussian_inputs(scene)
    n = scene.dim
    Q = mean_projector(scene.xi).Q
    kron, forcing = _jump_terms(scene, bath.cov)
    rate = scene.rate

    size = n * n
    aug = np.zeros((size + 1, size + 1))
    aug[:size, :size] = rate * (kron - np.eye(size))
    aug[:size, size] = rate * forcing.ravel()
    w0 = initial.mean - bath.mean
    y0 = np.concatenate([(initial.cov + np.outer(w0, w0)).ravel(), [1.0]])

    means = np.empty((len(times), n))
    covs = np.empty((len(times), n, n))
    for i, t in enumerate(times):
        M = (linalg.expm(aug * t) @ y0)[:size].reshape(n, n)
        wt = linalg.expm(rate * t * (Q - np.eye(n))) @ w0
        cov = M - np.outer(wt, wt)
        means[i] = bath.mean + wt
        covs[i] = 0.5 * (cov + cov.T)
    return MomentEvolution(times, Q, means, covs, bath.mean.copy(), initial.mean.copy(), rate)


def linear_semigroup(
    u, Q, t: float, bath_mean: Optional[np.ndarray] = None, rate: float = 1.0
) -> LinearFunctional:
    """P_t f for f(v) = u . v: v -> a . v + c with a = exp(rate t (Q - I)) u."""
    u = np.asarray(u, dtype=float)
    Q = np.asarray(Q, dtype=float)
    a = linalg.expm(rate * t * (Q - np.eye(Q.shape[0]))).T @ u
    m = np.zeros_like(u) if bath_mean is None else np.asarray(bath_mean, dtype=float)
    return LinearFunctional(a, float(u @ m - a @ m), name="P_t linear")


def semigroup_variance(
    scene: CollisionScene,
    f,
    t: float,
    n_outer: int = config.N_OUTER,
    n_inner: int = config.N_INNER,
    seed: int = 0,
    jobs: Optional[int] = None,
) -> MonteCarloEstimate:
    """Nested Monte Carlo Var_mu(P_t f) with mu the bath law.

    Outer draws V ~ mu; each is propagated ``n_inner`` times to time t and
    the inner means estimate P_t f(V). The estimate is corrected for the
    finite inner sample.
    """
    f = as_test_function(f)
    outer_chunk = max(1, config.SIM_CHUNK // max(1, n_inner))
    sizes = chunk_sizes(n_outer, outer_chunk)

    def task(c: int) -> np.ndarray:
        rng = substream(seed, "semigroup_variance", c)
        outer = scene.bath.draw(rng, sizes[c])
        starts = np.repeat(outer, n_inner, axis=0)
        if t <= 0:
            final = starts
        else:
            final = _run_chunk(scene, t, starts.shape[0], rng, start=starts, record=False).final
        return f(final).reshape(sizes[c], n_inner)

    values = np.vstack(run_tasks(task, len(sizes), jobs))
    return nested_moments(values).variance_of_mean
