"""Var(E[f(X) | P_E X]) and E[Var(f(X) | P_E X)].

Three methods:

- ``closed_form_gaussian``: X Gaussian, f at most quadratic. With
  h = 2 A m + b and T = Sigma P (P Sigma P)^+ P Sigma the covariance of
  E[X | P X],  Var(E[f | P X]) = 2 tr(A T A T) + h^T T h.
- ``resample_nested``: X splits along (E, E^perp), so
  E[f | P_E X = y] is the average of f(y + fresh E^perp part).
- ``binned``: dim E = 1, quantile bins of the E coordinate; needs no
  splitting.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .. import config
from ..core.error_handler import PreconditionError, ValidationError
from ..core.logger import get_logger
from ..core.rng import substream
from ..core.stats import MonteCarloEstimate, nested_moments, variance_with_se
from ..functions import TestFunction, as_test_function, quadratic_coefficients
from ..measures.gaussian import GaussianMeasure
from ..measures.spec import MeasureSpec
from ..measures.splitting import splits_along
from ..subspaces.subspace import Subspace

logger = get_logger(__name__)

CLOSED_FORM = "closed_form_gaussian"
RESAMPLE_NESTED = "resample_nested"
BINNED = "binned"
METHODS = ("auto", CLOSED_FORM, RESAMPLE_NESTED, BINNED)

DEFAULT_BINS = 50


def _exact(value: float) -> MonteCarloEstimate:
    return MonteCarloEstimate(float(value), 0.0, 0)


@dataclass(frozen=True)
class ConditionalVarianceEstimate:
    """Var(E[f | P_E X]) with its complement in the variance decomposition."""

    value: float
    se: float
    method: str
    expected_variance: MonteCarloEstimate
    total_variance: MonteCarloEstimate
    bias_bound: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def estimate(self) -> MonteCarloEstimate:
        return MonteCarloEstimate(self.value, self.se, self.expected_variance.n)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "se": self.se,
            "method": self.method,
            "expected_variance": self.expected_variance.to_dict(),
            "total_variance": self.total_variance.to_dict(),
            "bias_bound": self.bias_bound,
        }


def gaussian_function_variance(g: GaussianMeasure, A, b) -> float:
    """Var(X^T A X + b . X) for X ~ g."""
    h = 2.0 * A @ g.mean + b
    AS = A @ g.cov
    return float(2.0 * np.trace(AS @ AS) + h @ g.cov @ h)


def gaussian_conditional_variance(g: GaussianMeasure, S: Subspace, A, b) -> float:
    """Var(E[X^T A X + b . X | P_S X]) for X ~ g."""
    P = S.projector
    inner = linalg.pinvh(P @ g.cov @ P)
    T = g.cov @ P @ inner @ P @ g.cov
    h = 2.0 * A @ g.mean + b
    AT = A @ T
    return float(2.0 * np.trace(AT @ AT) + h @ T @ h)


def _closed_form(g: GaussianMeasure, S: Subspace, coeffs) -> ConditionalVarianceEstimate:
    A, b, _ = coeffs
    total = gaussian_function_variance(g, A, b)
    between = min(gaussian_conditional_variance(g, S, A, b), total)
    return ConditionalVarianceEstimate(
        between, 0.0, CLOSED_FORM, _exact(total - between), _exact(total)
    )


def _resample_nested(
    spec: MeasureSpec, S: Subspace, f: TestFunction, n_outer: int, n_inner: int, seed: int
) -> ConditionalVarianceEstimate:
    rng = substream(seed, "conditional_mean_variance", 0)
    outer = S.project(spec.draw(rng, n_outer))
    inner = S.project_complement(spec.draw(rng, n_outer * n_inner))
    points = np.repeat(outer, n_inner, axis=0) + inner
    values = f(points).reshape(n_outer, n_inner)
    nm = nested_moments(values)
    return ConditionalVarianceEstimate(
        nm.variance_of_mean.value,
        nm.variance_of_mean.se,
        RESAMPLE_NESTED,
        nm.expected_variance,
        nm.total_variance,
        nm.bias_bound,
        {"n_outer": n_outer, "n_inner": n_inner},
    )


def _binned(spec: MeasureSpec, S: Subspace, f: TestFunction, count: int, seed: int, bins: int):
    if S.dim != 1:
        raise ValidationError("binned conditioning needs a one-dimensional subspace", "method", "UNSUPPORTED_METHOD")
    rng = substream(seed, "conditional_mean_variance_binned", 0)
    x = spec.draw(rng, count)
    coord = S.coordinates(x)[:, 0]
    values = f(x)
    edges = np.quantile(coord, np.linspace(0.0, 1.0, bins + 1))
    labels = np.clip(np.searchsorted(edges, coord, side="right") - 1, 0, bins - 1)
    sizes = np.bincount(labels, minlength=bins)
    sums = np.bincount(labels, weights=values, minlength=bins)
    keep = sizes > 1
    means = np.where(sizes > 0, sums / np.maximum(sizes, 1), 0.0)
    sq = np.bincount(labels, weights=(values - means[labels]) ** 2, minlength=bins)
    within = np.where(keep, sq / np.maximum(sizes - 1, 1), 0.0)

    grand = values.mean()
    contrib = (means[labels] - grand) ** 2
    correction = float(np.sum(within[keep]) / count)
    value = float(contrib.mean()) - correction
    se = float(contrib.std(ddof=1) / np.sqrt(count))
    total = variance_with_se(values)
    expected = MonteCarloEstimate(total.value - value, float(np.hypot(total.se, se)), count)
    return ConditionalVarianceEstimate(
        value, se, BINNED, expected, total, correction, {"bins": bins, "n_samples": count}
    )


def conditional_mean_variance(
    spec: MeasureSpec,
    S: Subspace,
    f,
    n_outer: int = config.N_OUTER,
    n_inner: int = config.N_INNER,
    seed: int = 0,
    method: str = "auto",
) -> ConditionalVarianceEstimate:
    """Estimate Var(E[f(X) | P_S X]) for X ~ spec.

    ``auto`` uses the closed form when it applies and nested resampling
    otherwise. Nested resampling on a measure known not to split along S
    raises PreconditionError.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}", "method", "UNKNOWN_METHOD")
    f = as_test_function(f)
    if f.is_constant:
        zero = _exact(0.0)
        return ConditionalVarianceEstimate(0.0, 0.0, CLOSED_FORM if method == "auto" else method, zero, zero)

    g = spec.gaussian()
    coeffs = quadratic_coefficients(f, spec.dim)
    if method in ("auto", CLOSED_FORM) and g is not None and coeffs is not None:
        return _closed_form(g, S, coeffs)
    if method == CLOSED_FORM:
        raise PreconditionError("closed form needs a Gaussian measure and an at most quadratic f")
    if method == BINNED:
        return _binned(spec, S, f, n_outer * n_inner, seed, DEFAULT_BINS)

    splits = splits_along(spec, S)
    if splits is False:
        raise PreconditionError(
            "the measure does not split along the conditioning subspace; resampling would be biased",
            details={"subspace_dim": S.dim},
        )
    if splits is None:
        logger.warning("conditional_split_undecided", subspace_dim=S.dim)
    return _resample_nested(spec, S, f, n_outer, n_inner, seed)
