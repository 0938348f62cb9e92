"""Does a measure split along (E, E^perp)?

Exact answers where the measure is specified analytically, statistical
tests (cross-covariance Wald test, distance covariance, energy distance)
for samples.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import dcor
import numpy as np
from scipy import linalg, stats

from .. import config
from ..core.error_handler import DimensionMismatchError
from ..core.logger import get_logger
from ..core.rng import SeedLike, as_generator, seed_from_generator
from ..core.validators import ArrayValidator
from ..subspaces.distribution import SubspaceDistribution
from ..subspaces.subspace import Subspace, complement
from .gaussian import split_cross_norm
from .spec import CustomSpec, MeasureSpec, MixtureSpec, ProductSpec, sample

logger = get_logger(__name__)


@dataclass
class SplitDefect:
    """Integral over xi of |P_E Cov P_{E^perp}| with its per-atom values."""

    cross_norm: float
    per_atom: List[Tuple[Subspace, float]]
    exact: bool
    passed: bool
    threshold: float
    pvalues: Optional[List[float]] = None

    def to_dict(self) -> dict:
        return {
            "cross_norm": self.cross_norm,
            "per_atom": [value for _, value in self.per_atom],
            "exact": self.exact,
            "passed": self.passed,
            "threshold": self.threshold,
            "pvalues": self.pvalues,
        }


@dataclass
class SplitTestResult:
    """Outcome of the two-part independence test of P_S X and P_{S^perp} X.

    ``statistic`` is the cross-covariance Wald statistic; both component
    tests run at level/2 so the combined test has size at most ``level``.
    """

    statistic: float
    passed: bool
    cross_pvalue: float
    dcov_pvalue: float
    cross_norm: float
    level: float
    n_samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TwoSampleResult:
    statistic: float
    pvalue: float
    passed: bool
    level: float
    sizes: Tuple[int, int] = field(default=(0, 0))


def _cross_block(samples: np.ndarray, S: Subspace) -> Tuple[np.ndarray, np.ndarray]:
    return S.coordinates(samples), complement(S).coordinates(samples)


def _cross_cov(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    yc = y - y.mean(axis=0)
    zc = z - z.mean(axis=0)
    return yc.T @ zc / (y.shape[0] - 1)


def cross_covariance_wald(
    y: np.ndarray,
    z: np.ndarray,
    rng: np.random.Generator,
    n_boot: int = config.N_BOOTSTRAP,
) -> Tuple[float, float, float]:
    """Wald test that Cov(Y, Z) = 0 with a bootstrap covariance of its entries.

    Returns (statistic, p-value, spectral norm of the cross covariance).
    """
    k = _cross_cov(y, z)
    if k.size == 0:
        return 0.0, 1.0, 0.0
    m = y.shape[0]
    boot = np.empty((n_boot, k.size))
    for b in range(n_boot):
        idx = rng.integers(0, m, size=m)
        boot[b] = _cross_cov(y[idx], z[idx]).ravel()
    cov_boot = np.atleast_2d(np.cov(boot, rowvar=False))
    vec = k.ravel()
    stat = float(vec @ linalg.pinvh(cov_boot) @ vec)
    pvalue = float(stats.chi2.sf(stat, df=k.size))
    return stat, pvalue, float(np.linalg.norm(k, 2))


def covariance_split_defect(
    spec: MeasureSpec,
    xi: SubspaceDistribution,
    count: int = config.N_DIRECT,
    seed: SeedLike = 0,
    threshold: float = config.EXACT_SPLIT_THRESHOLD,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> SplitDefect:
    """Cross-covariance defect of ``spec`` against every atom of xi.

    Uses the exact covariance when ``spec`` provides one; otherwise the
    sample covariance of ``count`` draws, with each atom tested by the
    bootstrap Wald test at the two-sided level matching ``sigmas``.
    """
    xi.require_discrete("covariance_split_defect")
    if spec.dim != xi.ambient_dim:
        raise DimensionMismatchError(xi.ambient_dim, spec.dim, "spec")
    moments = spec.moments()
    if moments is not None:
        cov = moments[1]
        per_atom = [(S, split_cross_norm(cov, S)) for S in xi.atoms]
        cross = float(sum(w * v for (_, v), w in zip(per_atom, xi.weights)))
        passed = all(v <= threshold for _, v in per_atom)
        return SplitDefect(cross, per_atom, True, passed, threshold)

    rng = as_generator(seed, "covariance_split_defect")
    samples = spec.draw(rng, count)
    cov = np.cov(samples, rowvar=False).reshape(spec.dim, spec.dim)
    per_atom, pvalues = [], []
    for S in xi.atoms:
        y, z = _cross_block(samples, S)
        _, pvalue, _ = cross_covariance_wald(y, z, rng)
        per_atom.append((S, split_cross_norm(cov, S)))
        pvalues.append(pvalue)
    cross = float(sum(w * v for (_, v), w in zip(per_atom, xi.weights)))
    level = float(2.0 * stats.norm.sf(sigmas))
    passed = all(p >= level for p in pvalues)
    return SplitDefect(cross, per_atom, False, passed, level, pvalues)


def _subsample(x: np.ndarray, limit: int, rng: np.random.Generator) -> np.ndarray:
    if x.shape[0] <= limit:
        return x
    return x[np.sort(rng.choice(x.shape[0], size=limit, replace=False))]


def empirical_split_test(
    samples,
    S: Subspace,
    level: float = config.DEFAULT_LEVEL,
    seed: int = 0,
    num_resamples: int = config.NUM_RESAMPLES,
    max_dcov_samples: int = config.MAX_DCOV_SAMPLES,
) -> SplitTestResult:
    """Test independence of P_S X and P_{S^perp} X from samples.

    Passes only if both the cross-covariance Wald test (all samples) and
    the distance-covariance permutation test (seeded subsample) do not
    reject at level/2.
    """
    samples = ArrayValidator.samples(samples, S.ambient_dim, config.MIN_SPLIT_SAMPLES)
    ArrayValidator.probability(level, "level")
    rng = as_generator(seed, "empirical_split_test")
    y, z = _cross_block(samples, S)
    if y.shape[1] == 0 or z.shape[1] == 0:
        return SplitTestResult(0.0, True, 1.0, 1.0, 0.0, level, samples.shape[0])

    stat, cross_p, norm = cross_covariance_wald(y, z, rng)
    idx = _subsample(np.arange(samples.shape[0]), max_dcov_samples, rng)
    dcov = dcor.independence.distance_covariance_test(
        y[idx],
        z[idx],
        num_resamples=num_resamples,
        random_state=seed_from_generator(rng) % (2**32),
    )
    dcov_p = float(dcov.pvalue)
    passed = cross_p >= level / 2 and dcov_p >= level / 2
    logger.debug(
        "empirical_split_test",
        dim=S.dim,
        statistic=stat,
        cross_pvalue=cross_p,
        dcov_pvalue=dcov_p,
        passed=passed,
    )
    return SplitTestResult(stat, passed, cross_p, dcov_p, norm, level, samples.shape[0])


def energy_two_sample_test(
    a,
    b,
    level: float = config.DEFAULT_LEVEL,
    seed: int = 0,
    num_resamples: int = config.NUM_RESAMPLES,
    max_samples: int = config.MAX_ENERGY_SAMPLES,
) -> TwoSampleResult:
    """Energy-distance permutation test that ``a`` and ``b`` share a law."""
    a = ArrayValidator.samples(a, field="a")
    b = ArrayValidator.samples(b, a.shape[1], field="b")
    rng = as_generator(seed, "energy_two_sample_test")
    a = _subsample(a, max_samples, rng)
    b = _subsample(b, max_samples, rng)
    result = dcor.homogeneity.energy_test(
        a, b, num_resamples=num_resamples, random_state=seed_from_generator(rng) % (2**32)
    )
    pvalue = float(result.pvalue)
    return TwoSampleResult(float(result.statistic), pvalue, pvalue >= level, level, (len(a), len(b)))


def _aligned(block: Subspace, S: Subspace, tol: float) -> bool:
    overlap = S.projector @ block.basis
    return np.linalg.norm(overlap) <= tol or np.linalg.norm(overlap - block.basis) <= tol


def _is_coordinate_subspace(S: Subspace, tol: float) -> bool:
    diag = np.diag(S.projector)
    off = S.projector - np.diag(diag)
    return np.all(np.minimum(np.abs(diag), np.abs(diag - 1.0)) <= tol) and np.max(np.abs(off), initial=0.0) <= tol


def splits_along(spec: MeasureSpec, S: Subspace, tol: float = 1e-8) -> Optional[bool]:
    """Analytic verdict on whether ``spec`` splits along (S, S^perp); None if undecidable."""
    if spec.dim != S.ambient_dim:
        raise DimensionMismatchError(spec.dim, S.ambient_dim, "S")
    g = spec.gaussian()
    if g is not None:
        return split_cross_norm(g.cov, S) <= tol
    if isinstance(spec, ProductSpec):
        loose = [(b, f) for b, f in zip(spec.blocks, spec.factors) if not _aligned(b, S, tol)]
        if not loose:
            return True
        if any(f.gaussian() is None for _, f in loose):
            return None
        span = np.column_stack([b.basis for b, _ in loose])
        P_span = span @ span.T
        if np.linalg.norm(P_span @ S.projector - S.projector @ P_span) > tol:
            return None
        cov = sum(b.basis @ f.gaussian().cov @ b.basis.T for b, f in loose)
        return split_cross_norm(cov, S) <= tol
    if isinstance(spec, MixtureSpec):
        if not spec.xi.continuous and all(splits_along(spec.base, E, tol) for E in spec.xi.atoms):
            return splits_along(spec.base, S, tol)
        return None
    if isinstance(spec, CustomSpec) and spec.law is not None:
        return True if _is_coordinate_subspace(S, tol) else None
    return None


def splits_wrt(spec: MeasureSpec, xi: SubspaceDistribution, tol: float = 1e-8) -> Optional[bool]:
    """splits_along for every atom: False if any atom fails, None if any is undecidable."""
    xi.require_discrete("splits_wrt")
    verdicts = [splits_along(spec, E, tol) for E in xi.atoms]
    if any(v is False for v in verdicts):
        return False
    if any(v is None for v in verdicts):
        return None
    return True


def log_moment_status(spec: MeasureSpec) -> str:
    """Whether E log(1 + |X|) is finite: "finite", "infinite" or "untestable".

    Decided for Gaussian specs, products whose dependent factor is decided,
    mixtures (inherit the base) and iid scipy.stats coordinates. The
    condition on the whole measure implies it for every marginal.
    """
    if spec.gaussian() is not None:
        return "finite"
    if isinstance(spec, ProductSpec):
        statuses = [log_moment_status(f) for f in spec.factors]
        if spec.dependent_factor is not None:
            return statuses[-1]
        if all(s == "finite" for s in statuses):
            return "finite"
        return "infinite" if "infinite" in statuses else "untestable"
    if isinstance(spec, MixtureSpec):
        return log_moment_status(spec.base)
    if isinstance(spec, CustomSpec) and spec.law is not None:
        value = spec.law.expect(lambda x: np.log1p(np.abs(x)))
        return "finite" if np.isfinite(value) else "infinite"
    return "untestable"


def sample_split_report(
    spec: MeasureSpec,
    xi: SubspaceDistribution,
    count: int = config.N_DIRECT,
    level: float = config.DEFAULT_LEVEL,
    seed: int = 0,
) -> List[SplitTestResult]:
    """empirical_split_test of fresh samples of ``spec`` against every atom."""
    xi.require_discrete("sample_split_report")
    samples = sample(spec, count, seed)
    return [empirical_split_test(samples, E, level, seed=seed + i) for i, E in enumerate(xi.atoms)]
