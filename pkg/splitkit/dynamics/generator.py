"""Generator of the collision semigroup and the bilinear forms built on it.

L f(v) = sum_E w_E E[f(P_E v + P_{E^perp} V_*)] - f(v),  V_* ~ bath.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import config
from ..core.logger import get_logger
from ..core.rng import substream
from ..core.stats import MonteCarloEstimate, mean_with_se
from ..core.validators import ArrayValidator
from ..functions import as_test_function
from ..measures.splitting import splits_wrt
from .collision import CollisionScene

logger = get_logger(__name__)


@dataclass(frozen=True)
class ReversibilityResult:
    lhs: MonteCarloEstimate
    rhs: MonteCarloEstimate
    passed: bool
    bath_splits: Optional[bool]

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.passed))

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "passed": self.passed,
            "bath_splits": self.bath_splits,
        }


def generator_apply(f, scene: CollisionScene, v, n_mc: int = 10_000, seed: int = 0) -> MonteCarloEstimate:
    """Monte Carlo L f(v): exact sum over atoms, shared bath draws across atoms."""
    f = as_test_function(f)
    v = ArrayValidator.vector(v, scene.dim, "v")
    rng = substream(seed, "generator_apply", 0)
    partners = scene.bath.draw(rng, n_mc)
    fv = f(v)
    if scene.xi.continuous:
        subspaces = scene.xi.sample_subspaces(rng, n_mc)
        moved = np.vstack([S.project(v) + S.project_complement(w) for S, w in zip(subspaces, partners)])
        terms = f(moved) - fv
    else:
        terms = np.zeros(n_mc)
        for S, w in zip(scene.xi.atoms, scene.xi.weights):
            terms += w * (f(S.project(v)[None, :] + S.project_complement(partners)) - fv)
    estimate = mean_with_se(scene.rate * terms)
    if estimate.unstable:
        logger.warning("generator_apply_unstable", n_mc=n_mc, se=estimate.se)
    return estimate


def _post_collision(scene: CollisionScene, rng: np.random.Generator, n_mc: int):
    v = scene.bath.draw(rng, n_mc)
    partners = scene.bath.draw(rng, n_mc)
    moved = np.empty_like(v)
    if scene.xi.continuous:
        for i, S in enumerate(scene.xi.sample_subspaces(rng, n_mc)):
            moved[i] = S.project(v[i]) + S.project_complement(partners[i])
        return v, moved
    atoms = scene.xi.sample_atoms(rng, n_mc)
    for a, S in enumerate(scene.xi.atoms):
        mask = atoms == a
        if np.any(mask):
            moved[mask] = S.project(v[mask]) + S.project_complement(partners[mask])
    return v, moved


def reversibility_check(
    scene: CollisionScene,
    f,
    g,
    n_mc: int = config.N_DIRECT,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> ReversibilityResult:
    """Compare E_mu[f L g] with E_mu[g L f] on shared draws (V ~ bath, V' one collision later).

    Passes when the ``sigmas`` confidence intervals overlap.
    """
    f, g = as_test_function(f), as_test_function(g)
    bath_splits = None if scene.xi.continuous else splits_wrt(scene.bath, scene.xi)
    if bath_splits is False:
        logger.warning("reversibility_bath_not_splitting")
    rng = substream(seed, "reversibility_check", 0)
    v, moved = _post_collision(scene, rng, n_mc)
    fv, gv = f(v), g(v)
    lhs = mean_with_se(scene.rate * fv * (g(moved) - gv))
    rhs = mean_with_se(scene.rate * gv * (f(moved) - fv))
    passed = abs(lhs.value - rhs.value) <= sigmas * (lhs.se + rhs.se)
    return ReversibilityResult(lhs, rhs, bool(passed), bath_splits)


def dirichlet_form(f, scene: CollisionScene, n_mc: int = config.N_DIRECT, seed: int = 0) -> MonteCarloEstimate:
    """rate * (1/2) E[(f(V') - f(V))^2] with V ~ bath and V' the velocity after one collision."""
    f = as_test_function(f)
    rng = substream(seed, "dirichlet_form", 0)
    v, moved = _post_collision(scene, rng, n_mc)
    return mean_with_se(0.5 * scene.rate * (f(moved) - f(v)) ** 2)
