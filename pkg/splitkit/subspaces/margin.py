"""Splitting margin: the minimum of chi over the unit sphere."""

from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from .. import config
from ..core.logger import get_logger
from ..core.rng import substream
from .decomposition import independent_decomposition
from .distribution import SubspaceDistribution, chi

logger = get_logger(__name__)

INITIAL_STEP = 0.5
FINAL_STEP = 1e-6
POLISH_START = 1e-2
POLISH_STOP = 1e-10


class SplittingMargin(NamedTuple):
    theta: float
    argmin: np.ndarray


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _subgradient(xi: SubspaceDistribution, x: np.ndarray) -> np.ndarray:
    """Row-wise subgradient of chi: each atom contributes the gradient of the smaller norm."""
    grad = np.zeros_like(x)
    for S, w in zip(xi.atoms, xi.weights):
        inside = S.project(x)
        outside = x - inside
        a = np.linalg.norm(inside, axis=1, keepdims=True)
        b = np.linalg.norm(outside, axis=1, keepdims=True)
        pick_inside = a <= b
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(pick_inside, inside / a, outside / b)
        grad += w * np.nan_to_num(g)
    return grad


def _descend(xi: SubspaceDistribution, x: np.ndarray, iterations: int) -> tuple:
    decay = (FINAL_STEP / INITIAL_STEP) ** (1.0 / max(iterations, 1))
    step = INITIAL_STEP
    best_x = x.copy()
    best_val = chi(xi, x)
    for _ in range(iterations):
        g = _subgradient(xi, x)
        g -= np.sum(g * x, axis=1, keepdims=True) * x
        x = _normalize_rows(x - step * g)
        val = chi(xi, x)
        better = val < best_val
        best_val = np.where(better, val, best_val)
        best_x[better] = x[better]
        step *= decay
    return best_x, best_val


def _polish(xi: SubspaceDistribution, x: np.ndarray) -> tuple:
    """Pattern search on a mesh of the tangent space at x, shrinking on failure."""
    value = chi(xi, x)
    h = POLISH_START
    while h > POLISH_STOP:
        tangent = linalg.null_space(x[None, :])
        moves = np.vstack([tangent.T, -tangent.T])
        candidates = _normalize_rows(x + h * moves)
        values = chi(xi, candidates)
        j = int(np.argmin(values))
        if values[j] < value:
            x, value = candidates[j], float(values[j])
        else:
            h *= 0.5
    return x, value


def splitting_margin(
    xi: SubspaceDistribution,
    restarts: int = config.MARGIN_RESTARTS,
    seed: int = 0,
    iterations: Optional[int] = None,
) -> SplittingMargin:
    """Estimate min over |x| = 1 of chi(x), with a minimizer.

    Returns 0 directly when some independent subspace is nonzero, since chi
    vanishes on each of them.
    """
    xi.require_discrete("splitting_margin")
    decomposition = independent_decomposition(xi)
    if decomposition.independent:
        u = decomposition.independent[0].canonical_basis[:, 0].copy()
        return SplittingMargin(0.0, u)

    n = xi.ambient_dim
    iterations = iterations or config.MARGIN_ITERATIONS
    rng = substream(seed, "splitting_margin", 0)
    starts = _normalize_rows(rng.standard_normal((max(1, restarts), n)))
    best_x, best_val = _descend(xi, starts, iterations)
    order = np.argsort(best_val, kind="stable")
    x, value = _polish(xi, best_x[order[0]])
    logger.debug("splitting_margin", n=n, restarts=restarts, theta=value)
    return SplittingMargin(float(value), x)
