"""Monte Carlo estimates with standard errors and mergeable accumulators"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A point estimate with its standard error.

    ``unstable`` is set when the sample variance looks unreliable, e.g. the
    integrand is unbounded on the sampled range.
    """

    value: float
    se: float
    n: int
    unstable: bool = False

    def ci(self, z: float = 3.0) -> Tuple[float, float]:
        return (self.value - z * self.se, self.value + z * self.se)

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "n": self.n, "unstable": self.unstable}


def _heavy_tailed(x: np.ndarray) -> bool:
    # a single draw dominating the second moment signals an exploding variance
    if x.size < 20:
        return False
    sq = (x - x.mean()) ** 2
    total = sq.sum()
    return bool(total > 0 and sq.max() > 0.5 * total)


def mean_with_se(x) -> MonteCarloEstimate:
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n == 0:
        return MonteCarloEstimate(float("nan"), float("nan"), 0, True)
    if n == 1:
        return MonteCarloEstimate(float(x[0]), float("inf"), 1, True)
    value = float(x.mean())
    se = float(x.std(ddof=1) / np.sqrt(n))
    unstable = (not np.isfinite(value)) or _heavy_tailed(x)
    return MonteCarloEstimate(value, se, n, unstable)


def variance_with_se(x) -> MonteCarloEstimate:
    """Unbiased sample variance with a delta-method standard error."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        return MonteCarloEstimate(float("nan"), float("nan"), n, True)
    centered = x - x.mean()
    var = float(centered @ centered / (n - 1))
    m4 = float(np.mean(centered**4))
    se = float(np.sqrt(max(m4 - var**2, 0.0) / n))
    return MonteCarloEstimate(var, se, n, _heavy_tailed(x))


def covariance_with_se(x, y) -> MonteCarloEstimate:
    """Sample covariance of paired draws with a delta-method standard error."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if n < 2:
        return MonteCarloEstimate(float("nan"), float("nan"), n, True)
    prod = (x - x.mean()) * (y - y.mean())
    value = float(prod.sum() / (n - 1))
    se = float(prod.std(ddof=1) / np.sqrt(n))
    return MonteCarloEstimate(value, se, n, _heavy_tailed(prod))


@dataclass
class MomentAccumulator:
    """Streaming mean and covariance of n-vectors.

    Two accumulators merge exactly (pairwise update), so per-chunk results
    can be combined in a fixed order regardless of where they were computed.
    """

    dim: int
    count: int = 0
    mean: Optional[np.ndarray] = None
    comoment: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.comoment is None:
            self.comoment = np.zeros((self.dim, self.dim))

    def update(self, batch) -> "MomentAccumulator":
        batch = np.asarray(batch, dtype=float).reshape(-1, self.dim)
        if batch.shape[0] == 0:
            return self
        other = MomentAccumulator(self.dim)
        other.count = batch.shape[0]
        other.mean = batch.mean(axis=0)
        centered = batch - other.mean
        other.comoment = centered.T @ centered
        return self.merge(other)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count = other.count
            self.mean = other.mean.copy()
            self.comoment = other.comoment.copy()
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / total)
        self.comoment = (
            self.comoment
            + other.comoment
            + np.outer(delta, delta) * (self.count * other.count / total)
        )
        self.count = total
        return self

    def covariance(self) -> np.ndarray:
        if self.count < 2:
            return np.full((self.dim, self.dim), np.nan)
        return self.comoment / (self.count - 1)

    def mean_se(self) -> np.ndarray:
        if self.count < 2:
            return np.full(self.dim, np.nan)
        return np.sqrt(np.diag(self.covariance()) / self.count)


@dataclass(frozen=True)
class NestedMoments:
    """Conditional moments from an outer/inner design.

    ``expected_variance`` estimates E[Var(f | Y)] and ``variance_of_mean``
    estimates Var(E[f | Y]); the latter is bias-corrected for the finite
    inner sample.
    """

    expected_variance: MonteCarloEstimate
    variance_of_mean: MonteCarloEstimate
    total_variance: MonteCarloEstimate
    bias_bound: float


def nested_moments(values) -> NestedMoments:
    """Moments of an (n_outer, n_inner) array of f-values, one row per outer draw."""
    values = np.asarray(values, dtype=float)
    n_outer, n_inner = values.shape
    means = values.mean(axis=1)
    inner_var = values.var(axis=1, ddof=1) if n_inner > 1 else np.zeros(n_outer)

    expected = mean_with_se(inner_var)

    # Var(means) = Var(E[f|Y]) + E[Var(f|Y)] / n_inner
    centered = means - means.mean()
    var_means = float(centered @ centered / (n_outer - 1))
    value = var_means - expected.value / n_inner
    contrib = centered**2 - inner_var / n_inner
    se = float(contrib.std(ddof=1) / np.sqrt(n_outer))
    var_of_mean = MonteCarloEstimate(value, se, n_outer, _heavy_tailed(contrib))

    # between + within, with the pooled per-row second moment as the cluster unit
    total_value = var_of_mean.value + expected.value
    grand = values.mean()
    row_second = np.mean((values - grand) ** 2, axis=1)
    total_se = float(row_second.std(ddof=1) / np.sqrt(n_outer))
    total = MonteCarloEstimate(total_value, total_se, values.size)
    return NestedMoments(expected, var_of_mean, total, expected.value / n_inner)
