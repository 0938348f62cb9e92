"""Closed-form law of V_t in the Gaussian case and its relative entropy.

For bath N(m, I) and start N(theta, I) every collision word E_1..E_k gives
a Gaussian component N(m + P_{E_k}...P_{E_1}(theta - m), I) with weight
Poisson(k; rate t) * prod xi(E_j). Words are enumerated up to a
truncation length and components with equal means are merged.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import logsumexp
from scipy.stats import poisson

from .. import config
from ..core.error_handler import BudgetExceededError, PreconditionError, ValidationError
from ..core.logger import get_logger
from ..core.rng import substream
from ..core.stats import MonteCarloEstimate, mean_with_se
from ..core.validators import ArrayValidator
from ..measures.gaussian import GaussianMeasure, gaussian_kl
from .collision import CollisionScene

logger = get_logger(__name__)

DEFAULT_TAIL = 1e-8
MERGE_DECIMALS = 12
MAX_TRUNCATION = 200


@dataclass(frozen=True, eq=False)
class MixtureDensity:
    """Finite Gaussian mixture with a shared covariance; weights sum to 1 - truncation_mass."""

    means: np.ndarray
    weights: np.ndarray
    cov: np.ndarray
    truncation_mass: float
    origin: np.ndarray
    t: float

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def logpdf(self, x, normalized: bool = False) -> np.ndarray:
        """Log of the (sub-probability) density; ``normalized`` divides by total_weight."""
        x = np.asarray(x, dtype=float)
        rows = np.atleast_2d(x)
        c = linalg.cholesky(self.cov, lower=True)
        logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
        const = -0.5 * (logdet + self.dim * np.log(2 * np.pi))
        diff = rows[:, None, :] - self.means[None, :, :]
        sol = linalg.solve_triangular(c, diff.reshape(-1, self.dim).T, lower=True)
        quad = np.sum(sol**2, axis=0).reshape(rows.shape[0], self.n_components)
        out = logsumexp(np.log(self.weights)[None, :] - 0.5 * quad, axis=1) + const
        if normalized:
            out = out - np.log(self.total_weight)
        return out if x.ndim > 1 else out[0]

    def pdf(self, x, normalized: bool = False) -> np.ndarray:
        return np.exp(self.logpdf(x, normalized))

    def mean(self, normalized: bool = False) -> np.ndarray:
        total = self.weights @ self.means
        return total / self.total_weight if normalized else total

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draws from the normalized mixture."""
        p = self.weights / self.total_weight
        comp = rng.choice(self.n_components, size=count, p=p)
        noise = rng.standard_normal((count, self.dim)) @ linalg.cholesky(self.cov, lower=True).T
        return self.means[comp] + noise

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "n_components": self.n_components,
            "total_weight": self.total_weight,
            "truncation_mass": self.truncation_mass,
            "mean": self.mean().tolist(),
        }


@dataclass(frozen=True)
class KLEstimate:
    """Monte Carlo D(nu_t || reference) plus the truncation it ignores."""

    estimate: MonteCarloEstimate
    truncation_mass: float
    truncation_bias_bound: float

    @property
    def value(self) -> float:
        return self.estimate.value

    @property
    def se(self) -> float:
        return self.estimate.se

    def to_dict(self) -> dict:
        return {
            **self.estimate.to_dict(),
            "truncation_mass": self.truncation_mass,
            "truncation_bias_bound": self.truncation_bias_bound,
        }


def choose_truncation(mean_jumps: float, tail: float = DEFAULT_TAIL) -> int:
    """Smallest k with P(Poisson(mean_jumps) > k) < tail."""
    ArrayValidator.probability(tail, "tail")
    if mean_jumps <= 0:
        return 0
    k = int(poisson.isf(tail, mean_jumps))
    while poisson.sf(k, mean_jumps) >= tail and k < MAX_TRUNCATION:
        k += 1
    while k > 0 and poisson.sf(k - 1, mean_jumps) < tail:
        k -= 1
    return k


def _isotropic_inputs(scene: CollisionScene):
    scene.xi.require_discrete("nu_t_density")
    bath = scene.bath.gaussian()
    initial = scene.initial.gaussian()
    if bath is None or initial is None:
        raise PreconditionError("the mixture law needs Gaussian bath and initial laws")
    if not np.allclose(bath.cov, initial.cov, rtol=0.0, atol=1e-12):
        raise PreconditionError(
            "the mixture law needs equal bath and initial covariances",
            details={"bath_cov": bath.cov.tolist(), "initial_cov": initial.cov.tolist()},
        )
    if not np.allclose(bath.cov, np.eye(bath.dim), rtol=0.0, atol=1e-12):
        # P v + P^perp v_* keeps covariance C only when C commutes with every P
        for S in scene.xi.atoms:
            if not np.allclose(S.projector @ bath.cov, bath.cov @ S.projector, atol=1e-10):
                raise PreconditionError("bath covariance does not commute with the collision projectors")
    return bath, initial


def nu_t_density(
    scene: CollisionScene,
    t: float,
    trunc_k: Optional[int] = None,
    budget: int = config.ENUMERATION_BUDGET,
) -> MixtureDensity:
    """Law of V_t as an explicit mixture, words up to length ``trunc_k``.

    ``trunc_k`` defaults to the smallest length leaving Poisson tail mass
    below 1e-8.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative", "t", "NEGATIVE_TIME")
    bath, initial = _isotropic_inputs(scene)
    mean_jumps = scene.rate * t
    if trunc_k is None:
        trunc_k = choose_truncation(mean_jumps)
    trunc_k = ArrayValidator.count(trunc_k, "trunc_k", minimum=0)
    a = scene.xi.size
    if float(a) ** trunc_k > budget:
        raise BudgetExceededError(float(a) ** trunc_k, budget, "collision words")

    projectors = [S.projector for S in scene.xi.atoms]
    level = {tuple(np.round(initial.mean - bath.mean, MERGE_DECIMALS)): (initial.mean - bath.mean, 1.0)}
    merged: dict = {}
    for k in range(trunc_k + 1):
        pk = float(poisson.pmf(k, mean_jumps)) if mean_jumps > 0 else float(k == 0)
        for key, (m, w) in level.items():
            prev = merged.get(key)
            merged[key] = (m, w * pk + (prev[1] if prev else 0.0))
        if k == trunc_k:
            break
        nxt: dict = {}
        for m, w in level.values():
            for P, wi in zip(projectors, scene.xi.weights):
                pm = P @ m
                key = tuple(np.round(pm, MERGE_DECIMALS))
                prev = nxt.get(key)
                nxt[key] = (pm, w * wi + (prev[1] if prev else 0.0))
        level = nxt

    items = [(m, w) for m, w in merged.values() if w > 0]
    means = bath.mean + np.vstack([m for m, _ in items])
    weights = np.array([w for _, w in items])
    mass = float(poisson.sf(trunc_k, mean_jumps)) if mean_jumps > 0 else 0.0
    logger.debug("nu_t_density", t=t, trunc_k=trunc_k, components=len(items), truncation_mass=mass)
    return MixtureDensity(means, weights, bath.cov.copy(), mass, initial.mean.copy(), float(t))


def kl_to_gaussian(
    density: MixtureDensity,
    reference: GaussianMeasure,
    n_mc: int = config.N_DIRECT,
    seed: int = 0,
) -> KLEstimate:
    """Self-normalized estimate of D(nu_t || reference) with the mixture as proposal.

    The truncated mass is not absorbed: the bias bound covers the tail
    words, whose components each sit no farther from the reference than
    the starting law does.
    """
    if reference.dim != density.dim:
        raise ValidationError("reference dimension differs from the density", "reference", "DIMENSION_MISMATCH")
    rng = substream(seed, "kl_to_gaussian", 0)
    x = density.sample(rng, n_mc)
    log_ratio = density.logpdf(x, normalized=True) - reference.logpdf(x)
    estimate = mean_with_se(log_ratio)
    if estimate.unstable:
        logger.warning("kl_to_gaussian_unstable", n_mc=n_mc, se=estimate.se)

    start = GaussianMeasure(density.origin, density.cov)
    tail_kl = gaussian_kl(start, reference)
    if not np.isfinite(tail_kl):
        tail_kl = 0.0
    bias = density.truncation_mass * max(abs(estimate.value), tail_kl)
    return KLEstimate(estimate, density.truncation_mass, float(bias))


def dv_lower_bound(theta, lam: float, t: float, beta: float, n: Optional[int] = None) -> float:
    """n/(2 beta) - (n/2) log(beta/(beta-1)) + e^{-lam t} |theta|^2 / (2 beta)."""
    theta = ArrayValidator.vector(theta, field="theta")
    if not beta > 1:
        raise ValidationError(f"beta must exceed 1, got {beta}", "beta", "OUT_OF_RANGE")
    n = theta.shape[0] if n is None else int(n)
    return float(
        n / (2 * beta)
        - 0.5 * n * np.log(beta / (beta - 1))
        + np.exp(-lam * t) * 0.5 * float(theta @ theta) / beta
    )


def entropy_decay_bound(initial_kl: float, lam: float, t: float) -> float:
    """e^{-lam t} D(nu_0 || mu)."""
    return float(np.exp(-lam * t) * initial_kl)
