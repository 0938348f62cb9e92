"""Tail-ratio diagnostic: does P(|X|^2 > t) <= C P(|X|^2 > c t) hold for large t?

Survival probabilities carry Clopper-Pearson intervals. A grid point
holds when the upper bound at t is below C times the lower bound at c t,
and is violated when the lower bound at t exceeds C times the upper bound
at c t. The result is a diagnostic, not a guarantee.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from .. import config
from ..core.logger import get_logger
from ..core.validators import ArrayValidator
from .report import HOLDS, INCONCLUSIVE, VIOLATED, SlackReport

logger = get_logger(__name__)

GRID_POINTS = 40
MIN_TAIL_COUNT = 50


@dataclass
class TailDiagnostic:
    grid: np.ndarray
    survival: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    statuses: List[str]
    t0: Optional[float]
    verdict: str
    c: float
    C: float
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "survival": self.survival.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "statuses": list(self.statuses),
            "t0": self.t0,
            "verdict": self.verdict,
            "c": self.c,
            "C": self.C,
            "n_samples": self.n_samples,
        }

    def to_report(self) -> SlackReport:
        """Summary as a SlackReport: lhs is the largest tail ratio at or beyond t0 (or the grid end)."""
        start = 0 if self.t0 is None else int(np.searchsorted(self.grid, self.t0))
        ratios = self.ratios()[start:]
        finite = ratios[np.isfinite(ratios)]
        lhs = float(finite.max()) if finite.size else float("nan")
        slack = self.C - lhs
        return SlackReport(
            "tail_ratio", lhs, 0.0, self.C, 0.0, slack, self.verdict, False, 0.0,
            {"diagnostic": self.to_dict()},
        )

    def ratios(self) -> np.ndarray:
        """Survival at t over survival at c t; NaN where c t lies below the grid."""
        ct = self.c * self.grid
        shifted = np.interp(ct, self.grid, self.survival)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(shifted > 0, self.survival / shifted, np.nan)
        return np.where(ct >= self.grid[0], ratios, np.nan)


def _clopper_pearson(k: np.ndarray, n: int, alpha: float):
    lower = np.where(k > 0, stats.beta.ppf(alpha / 2, k, n - k + 1), 0.0)
    upper = np.where(k < n, stats.beta.ppf(1 - alpha / 2, k + 1, n - k), 1.0)
    return lower, upper


def _default_grid(r: np.ndarray) -> np.ndarray:
    top = 1.0 - MIN_TAIL_COUNT / r.size
    return np.unique(np.quantile(r, np.linspace(0.05, top, GRID_POINTS)))


def tail_ratio_diagnostic(
    samples,
    c: float,
    C: float,
    t_grid: Optional[Sequence[float]] = None,
    level: float = config.DEFAULT_LEVEL,
) -> TailDiagnostic:
    """Empirical check of the tail estimate on the squared norm of ``samples``.

    ``t0`` is the smallest grid point from which no point is violated and
    at least one holds; verdict "holds" iff such t0 exists, "violated" iff
    it does not and some point is violated.
    """
    samples = ArrayValidator.samples(samples, min_rows=config.MIN_TAIL_SAMPLES)
    c = ArrayValidator.probability(c, "c")
    C = ArrayValidator.probability(C, "C")
    r = np.sum(samples**2, axis=1)
    n = r.size
    grid = _default_grid(r) if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    sorted_r = np.sort(r)

    def exceed(t):
        return n - np.searchsorted(sorted_r, t, side="right")

    k_t = exceed(grid)
    k_ct = exceed(c * grid)
    # one interval per side of each comparison
    alpha = level / max(1, len(grid))
    lo_t, hi_t = _clopper_pearson(k_t, n, alpha)
    lo_ct, hi_ct = _clopper_pearson(k_ct, n, alpha)

    statuses = []
    for i in range(len(grid)):
        if hi_t[i] <= C * lo_ct[i]:
            statuses.append(HOLDS)
        elif lo_t[i] > C * hi_ct[i]:
            statuses.append(VIOLATED)
        else:
            statuses.append(INCONCLUSIVE)

    t0 = None
    seen_hold = False
    for i in range(len(grid) - 1, -1, -1):
        if statuses[i] == VIOLATED:
            break
        seen_hold = seen_hold or statuses[i] == HOLDS
        if seen_hold:
            t0 = float(grid[i])
    if t0 is not None:
        verdict = HOLDS
    elif VIOLATED in statuses:
        verdict = VIOLATED
    else:
        verdict = INCONCLUSIVE
    logger.info("tail_ratio_diagnostic", n_samples=n, grid=len(grid), t0=t0, verdict=verdict)
    return TailDiagnostic(grid, k_t / n, lo_t, hi_t, statuses, t0, verdict, c, C, n)
