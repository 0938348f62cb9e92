"""SlackReport: both sides of an inequality, their errors, and a verdict."""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import stats

from .. import config
from ..core.stats import MonteCarloEstimate

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

EXACT_TOL = 1e-10

Side = Union[MonteCarloEstimate, float]


@dataclass
class SlackReport:
    """lhs <= rhs, checked with a combined ``sigmas`` margin.

    ``tight`` marks equality cases: |slack| within the margin (or within
    1e-10 on exact paths).
    """

    name: str
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    slack: float
    verdict: str
    tight: bool
    margin: float
    metadata: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.lhs_se == 0.0 and self.rhs_se == 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _finite_or_str(self.lhs),
            "lhs_se": _finite_or_str(self.lhs_se),
            "rhs": _finite_or_str(self.rhs),
            "rhs_se": _finite_or_str(self.rhs_se),
            "slack": _finite_or_str(self.slack),
            "verdict": self.verdict,
            "tight": self.tight,
            "margin": _finite_or_str(self.margin),
            "metadata": self.metadata,
        }


def _finite_or_str(x: float):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _split(side: Side):
    if isinstance(side, MonteCarloEstimate):
        return float(side.value), float(side.se)
    return float(side), 0.0


def verdict_for(lhs: float, rhs: float, margin: float) -> str:
    if any(math.isnan(v) for v in (lhs, rhs, margin)):
        return INCONCLUSIVE
    if math.isinf(rhs) and rhs > 0:
        return HOLDS
    return HOLDS if lhs <= rhs + margin else VIOLATED


def make_report(
    name: str,
    lhs: Side,
    rhs: Side,
    sigmas: float = config.DEFAULT_SIGMAS,
    metadata: Optional[dict] = None,
) -> SlackReport:
    lhs_v, lhs_se = _split(lhs)
    rhs_v, rhs_se = _split(rhs)
    if lhs_se == 0.0 and rhs_se == 0.0:
        margin = EXACT_TOL * max(1.0, abs(lhs_v), abs(rhs_v)) if math.isfinite(rhs_v) else 0.0
    else:
        margin = sigmas * math.sqrt(lhs_se**2 + rhs_se**2)
    slack = rhs_v - lhs_v
    verdict = verdict_for(lhs_v, rhs_v, margin)
    tight = bool(math.isfinite(slack) and abs(slack) <= margin)
    return SlackReport(name, lhs_v, lhs_se, rhs_v, rhs_se, slack, verdict, tight, margin, dict(metadata or {}))


def inapplicable(name: str, reason: str, metadata: Optional[dict] = None) -> SlackReport:
    """Placeholder report for a form that cannot be evaluated (e.g. division by lambda = 0)."""
    meta = {"inapplicable": reason, **(metadata or {})}
    nan = float("nan")
    return SlackReport(name, nan, nan, nan, nan, nan, INCONCLUSIVE, False, nan, meta)


def bonferroni_sigmas(level: float, m: int, sigmas: float = config.DEFAULT_SIGMAS) -> float:
    """Margin multiplier for m simultaneous one-sided checks at family level ``level``."""
    if m <= 1:
        return float(sigmas)
    return float(max(sigmas, stats.norm.isf(level / m)))


def combine_se(*ses: float) -> float:
    return float(np.sqrt(np.sum(np.square(ses))))
