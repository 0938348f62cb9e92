"""Variance and entropy inequalities under a splitting measure.

Every check returns SlackReports (lhs <= rhs). Gaussian measures with at
most quadratic functions take exact paths; everything else is Monte Carlo
with standard errors.
"""

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .. import config
from ..core.error_handler import PreconditionError, UnsupportedOperationError, ValidationError
from ..core.logger import get_logger
from ..core.rng import child_seed, substream
from ..core.stats import MonteCarloEstimate, nested_moments, variance_with_se
from ..core.validators import ArrayValidator, CoverValidator
from ..dynamics.collision import CollisionScene
from ..dynamics.generator import dirichlet_form
from ..functions import (
    TestFunction,
    as_test_function,
    quadratic_coefficients,
    scalar_function,
)
from ..measures.gaussian import GaussianMeasure, gaussian_kl, marginal_gaussian, split_cross_norm
from ..measures.spec import MeasureSpec, ProductSpec
from ..measures.splitting import splits_wrt
from ..subspaces.distribution import SubspaceDistribution, mean_projector
from ..subspaces.subspace import coordinate_subspace
from .conditional import conditional_mean_variance, gaussian_function_variance
from .report import SlackReport, combine_se, inapplicable, make_report

logger = get_logger(__name__)

LAMBDA_TOL = 1e-12

GFunction = Union[str, Callable[[np.ndarray], np.ndarray]]


def _exact(value: float) -> MonteCarloEstimate:
    return MonteCarloEstimate(float(value), 0.0, 0)


def _lambda(xi: SubspaceDistribution, lam: Optional[float]) -> float:
    return mean_projector(xi).lam if lam is None else float(lam)


def _require_split(spec: MeasureSpec, xi: SubspaceDistribution, check: str) -> Optional[bool]:
    verdict = splits_wrt(spec, xi)
    if verdict is False:
        raise PreconditionError(
            f"{check} needs a measure that splits with respect to xi",
            details={"check": check},
        )
    if verdict is None:
        logger.warning("split_undecided", check=check)
    return verdict


def _variance(spec: MeasureSpec, f: TestFunction, count: int, seed: int, module: str) -> MonteCarloEstimate:
    """Var(f(X)), exact for Gaussian X and at most quadratic f."""
    if f.is_constant:
        return _exact(0.0)
    g = spec.gaussian()
    coeffs = quadratic_coefficients(f, spec.dim)
    if g is not None and coeffs is not None:
        return _exact(gaussian_function_variance(g, coeffs[0], coeffs[1]))
    x = spec.draw(substream(seed, module, 0), count)
    return variance_with_se(f(x))


def _weighted_sum(estimates: Sequence[MonteCarloEstimate], weights) -> MonteCarloEstimate:
    weights = np.asarray(weights, dtype=float)
    value = float(sum(w * e.value for w, e in zip(weights, estimates)))
    se = combine_se(*(w * e.se for w, e in zip(weights, estimates)))
    n = int(sum(e.n for e in estimates))
    return MonteCarloEstimate(value, se, n, any(e.unstable for e in estimates))


def _scaled(est: MonteCarloEstimate, factor: float) -> MonteCarloEstimate:
    return MonteCarloEstimate(factor * est.value, abs(factor) * est.se, est.n, est.unstable)


def check_linearized_bl(
    spec: MeasureSpec,
    xi: SubspaceDistribution,
    f,
    lam: Optional[float] = None,
    n_outer: int = config.N_OUTER,
    n_inner: int = config.N_INNER,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
    method: str = "auto",
    n_direct: int = config.N_DIRECT,
) -> Tuple[SlackReport, SlackReport]:
    """Both linearized forms.

    Conditional-mean form:  sum w_E Var(E[f | P_E X]) <= (1 - lambda) Var(f).
    Conditional-variance form:  Var(f) <= (1/lambda) sum w_E E[Var(f | P_E X)].
    """
    xi.require_discrete("check_linearized_bl")
    f = as_test_function(f)
    lam = _lambda(xi, lam)
    _require_split(spec, xi, "linearized_bl")

    per_atom = [
        conditional_mean_variance(spec, E, f, n_outer, n_inner, child_seed(seed, "linearized_bl", i), method)
        for i, E in enumerate(xi.atoms)
    ]
    exact = all(est.se == 0.0 and est.expected_variance.se == 0.0 for est in per_atom)
    if exact:
        total = per_atom[0].total_variance
    else:
        total = _variance(spec, f, n_direct, seed, "linearized_bl_total")

    between = _weighted_sum([est.estimate for est in per_atom], xi.weights)
    within = _weighted_sum([est.expected_variance for est in per_atom], xi.weights)
    meta = {
        "lambda": lam,
        "methods": sorted({est.method for est in per_atom}),
        "bias_bound": float(sum(w * est.bias_bound for w, est in zip(xi.weights, per_atom))),
        "function": getattr(f, "name", "function"),
    }
    mean_form = make_report(
        "linearized_bl_conditional_mean", between, _scaled(total, 1.0 - lam), sigmas, meta
    )
    if lam <= LAMBDA_TOL:
        variance_form = inapplicable("linearized_bl_conditional_variance", "lambda is zero", meta)
    else:
        variance_form = make_report(
            "linearized_bl_conditional_variance", total, _scaled(within, 1.0 / lam), sigmas, meta
        )
    return mean_form, variance_form


def _as_gaussian(measure: Union[MeasureSpec, GaussianMeasure], field: str) -> GaussianMeasure:
    if isinstance(measure, GaussianMeasure):
        return measure
    g = measure.gaussian()
    if g is None:
        raise UnsupportedOperationError(
            f"{field} must be Gaussian for the closed-form entropy check", details={"field": field}
        )
    return g


def check_bl_split(
    mu: Union[MeasureSpec, GaussianMeasure],
    xi: SubspaceDistribution,
    nu: Union[MeasureSpec, GaussianMeasure],
    lam: Optional[float] = None,
    tol: float = 1e-8,
) -> SlackReport:
    """sum w_E D(nu_E || mu_E) <= (1 - lambda) D(nu || mu), in closed form."""
    xi.require_discrete("check_bl_split")
    mu_g = _as_gaussian(mu, "mu")
    nu_g = _as_gaussian(nu, "nu")
    lam = _lambda(xi, lam)
    worst = max(split_cross_norm(mu_g.cov, E) for E in xi.atoms)
    if worst > tol:
        raise PreconditionError(
            "mu does not split with respect to xi", details={"cross_norm": worst}
        )
    terms = [gaussian_kl(marginal_gaussian(nu_g, E), marginal_gaussian(mu_g, E)) for E in xi.atoms]
    lhs = float(sum(w * t for w, t in zip(xi.weights, terms))) if all(np.isfinite(terms)) else float("inf")
    full = gaussian_kl(nu_g, mu_g)
    rhs = (1.0 - lam) * full if np.isfinite(full) else float("inf")
    meta = {"lambda": lam, "per_atom": [float(t) if np.isfinite(t) else "inf" for t in terms]}
    if not np.isfinite(full):
        meta["rhs_infinite"] = True
    return make_report("bl_split", lhs, rhs, metadata=meta)


def check_efron_stein(
    component_specs: Sequence[MeasureSpec],
    f,
    n_outer: int = config.N_OUTER,
    n_inner: int = config.N_INNER,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
    n_direct: int = config.N_DIRECT,
) -> SlackReport:
    """Var f(X) <= sum_i E[Var(f(X) | X without coordinate i)] for independent coordinates."""
    for i, c in enumerate(component_specs):
        if c.dim != 1:
            raise ValidationError(f"component {i} must be one-dimensional", f"components[{i}]", "NOT_SCALAR")
    spec = ProductSpec.coordinates(component_specs)
    k = spec.dim
    f = as_test_function(f)
    terms = []
    for i in range(k):
        others = coordinate_subspace([j for j in range(k) if j != i], k)
        est = conditional_mean_variance(spec, others, f, n_outer, n_inner, child_seed(seed, "efron_stein", i))
        terms.append(est.expected_variance)
    rhs = _weighted_sum(terms, np.ones(k))
    lhs = _variance(spec, f, n_direct, seed, "efron_stein_total")
    return make_report("efron_stein", lhs, rhs, sigmas, {"k": k, "function": getattr(f, "name", "function")})


def _gaussian_dks(base: GaussianMeasure, g_name: str, n: int, m: int):
    mu0, var = float(base.mean[0]), float(base.cov[0, 0])
    if g_name == "identity":
        return m * var, (m / n) * n * var
    if g_name == "square":
        # Var(Y^2) = 2 s^4 + 4 c^2 s^2 for Y ~ N(c, s^2)
        c = n * mu0
        lhs = 2.0 * (m * var) ** 2 + 4.0 * c**2 * m * var
        rhs = (m / n) * (2.0 * (n * var) ** 2 + 4.0 * c**2 * n * var)
        return lhs, rhs
    return None


def check_dks(
    base_spec: MeasureSpec,
    g: GFunction,
    n: int,
    m: int,
    n_outer: int = config.N_OUTER,
    n_inner: int = config.N_INNER,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
    n_direct: int = config.N_DIRECT,
) -> SlackReport:
    """Var(E[g(S_n) | S_m]) <= (m/n) Var(g(S_n)) for partial sums of iid draws."""
    if base_spec.dim != 1:
        raise ValidationError("the base law must be one-dimensional", "base", "NOT_SCALAR")
    n = ArrayValidator.count(n, "n")
    m = ArrayValidator.count(m, "m")
    if m > n:
        raise ValidationError("need m <= n", "m", "OUT_OF_RANGE")
    g_name = g if isinstance(g, str) else getattr(g, "__name__", "g")
    g_fn = scalar_function(g) if isinstance(g, str) else g
    meta = {"n": n, "m": m, "g": g_name}

    base_g = base_spec.gaussian()
    if base_g is not None and isinstance(g, str):
        closed = _gaussian_dks(base_g, g, n, m)
        if closed is not None:
            return make_report("dks", closed[0], closed[1], sigmas, {**meta, "method": "closed_form_gaussian"})

    rng = substream(seed, "dks_total", 0)
    direct = np.asarray(g_fn(base_spec.draw(rng, n_direct * n).reshape(n_direct, n).sum(axis=1)), dtype=float)
    total = variance_with_se(direct)
    if m == n:
        return make_report("dks", total, _scaled(total, 1.0), sigmas, {**meta, "method": "direct"})

    rng = substream(seed, "dks_nested", 0)
    head = base_spec.draw(rng, n_outer * m).reshape(n_outer, m).sum(axis=1)
    tail = base_spec.draw(rng, n_outer * n_inner * (n - m)).reshape(n_outer, n_inner, n - m).sum(axis=2)
    values = np.asarray(g_fn((head[:, None] + tail).ravel()), dtype=float).reshape(n_outer, n_inner)
    between = nested_moments(values)
    meta.update({"method": "resample_nested", "bias_bound": between.bias_bound})
    return make_report("dks", between.variance_of_mean, _scaled(total, m / n), sigmas, meta)


def _embed(psi: TestFunction, member: Tuple[int, ...], n: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    coeffs = quadratic_coefficients(psi, len(member))
    if coeffs is None:
        return None
    A_small, b_small, _ = coeffs
    A = np.zeros((n, n))
    b = np.zeros(n)
    idx = np.array(member)
    A[np.ix_(idx, idx)] = A_small
    b[idx] = b_small
    return A, b


def check_madiman_barron(
    component_specs: Sequence[MeasureSpec],
    cover: Sequence[Sequence[int]],
    r: int,
    psi: Sequence,
    n_mc: int = config.N_DIRECT,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> SlackReport:
    """Var(sum_i psi_i(X_{S_i})) <= r sum_i Var(psi_i(X_{S_i})) for an r-cover."""
    n = len(component_specs)
    checked = CoverValidator.validate(cover, n, r)
    members = checked["members"]
    if len(psi) != len(members):
        raise ValidationError(
            f"{len(psi)} functions for {len(members)} cover members", "psi", "COUNT_MISMATCH"
        )
    psi = [as_test_function(p) for p in psi]
    spec = ProductSpec.coordinates(component_specs)
    meta = {"r": r, "members": [list(mb) for mb in members], "uncovered": checked["uncovered"]}
    if checked["uncovered"]:
        logger.warning("cover_leaves_indices_uncovered", uncovered=checked["uncovered"])
        meta["flag"] = "cover misses some indices"

    g = spec.gaussian()
    embedded = [_embed(p, mb, n) for p, mb in zip(psi, members)]
    if g is not None and all(e is not None for e in embedded):
        A = sum(e[0] for e in embedded)
        b = sum(e[1] for e in embedded)
        lhs = gaussian_function_variance(g, A, b)
        rhs = r * sum(gaussian_function_variance(g, Ai, bi) for Ai, bi in embedded)
        return make_report("madiman_barron", lhs, rhs, sigmas, {**meta, "method": "closed_form_gaussian"})

    x = spec.draw(substream(seed, "madiman_barron", 0), n_mc)
    parts = np.column_stack([p(x[:, list(mb)]) for p, mb in zip(psi, members)])
    lhs = variance_with_se(parts.sum(axis=1))
    singles = [variance_with_se(parts[:, i]) for i in range(parts.shape[1])]
    rhs_value = r * sum(s.value for s in singles)
    # shared samples: the per-term errors are correlated, add them linearly
    rhs_se = r * sum(s.se for s in singles)
    rhs = MonteCarloEstimate(rhs_value, rhs_se, n_mc)
    return make_report("madiman_barron", lhs, rhs, sigmas, {**meta, "method": "direct"})


def check_jensen_improvement(
    spec: MeasureSpec,
    xi: SubspaceDistribution,
    psi_family: Sequence,
    lam: Optional[float] = None,
    n_mc: int = config.N_DIRECT,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> SlackReport:
    """Var(sum w_E psi_E(P_E X)) <= (1 - lambda) sum w_E Var(psi_E(P_E X))."""
    xi.require_discrete("check_jensen_improvement")
    if len(psi_family) != xi.size:
        raise ValidationError(
            f"{len(psi_family)} functions for {xi.size} atoms", "psi", "COUNT_MISMATCH"
        )
    psi_family = [as_test_function(p) for p in psi_family]
    lam = _lambda(xi, lam)
    _require_split(spec, xi, "jensen_improvement")
    meta = {"lambda": lam, "weights": [float(w) for w in xi.weights]}

    g = spec.gaussian()
    coeffs = [quadratic_coefficients(p, spec.dim) for p in psi_family]
    if g is not None and all(c is not None for c in coeffs):
        composed = [(E.projector @ c[0] @ E.projector, E.projector @ c[1]) for E, c in zip(xi.atoms, coeffs)]
        A = sum(w * Ac for w, (Ac, _) in zip(xi.weights, composed))
        b = sum(w * bc for w, (_, bc) in zip(xi.weights, composed))
        lhs = gaussian_function_variance(g, A, b)
        avg = sum(w * gaussian_function_variance(g, Ac, bc) for w, (Ac, bc) in zip(xi.weights, composed))
        return make_report(
            "jensen_improvement", lhs, (1.0 - lam) * avg, sigmas, {**meta, "method": "closed_form_gaussian"}
        )

    x = spec.draw(substream(seed, "jensen_improvement", 0), n_mc)
    parts = np.column_stack([p(E.project(x)) for E, p in zip(xi.atoms, psi_family)])
    lhs = variance_with_se(parts @ xi.weights)
    singles = [variance_with_se(parts[:, i]) for i in range(parts.shape[1])]
    rhs = MonteCarloEstimate(
        (1.0 - lam) * sum(w * s.value for w, s in zip(xi.weights, singles)),
        (1.0 - lam) * sum(w * s.se for w, s in zip(xi.weights, singles)),
        n_mc,
    )
    return make_report("jensen_improvement", lhs, rhs, sigmas, {**meta, "method": "direct"})


def check_poincare(
    spec: MeasureSpec,
    xi: SubspaceDistribution,
    f,
    lam: Optional[float] = None,
    n_mc: int = config.N_DIRECT,
    seed: int = 0,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> SlackReport:
    """Var_mu(f) <= (1/lambda) E(f) with E the Dirichlet form of the rate-1 collision generator.

    Under splitting E(f) = sum w_E E[Var(f | P_E X)], which is the
    closed-form path.
    """
    xi.require_discrete("check_poincare")
    f = as_test_function(f)
    lam = _lambda(xi, lam)
    _require_split(spec, xi, "poincare")
    meta = {"lambda": lam, "function": getattr(f, "name", "function")}
    if lam <= LAMBDA_TOL:
        return inapplicable("poincare", "lambda is zero", meta)

    g = spec.gaussian()
    coeffs = quadratic_coefficients(f, spec.dim)
    if g is not None and coeffs is not None:
        total = gaussian_function_variance(g, coeffs[0], coeffs[1])
        per_atom = [
            conditional_mean_variance(spec, E, f).expected_variance.value for E in xi.atoms
        ]
        energy = float(sum(w * v for w, v in zip(xi.weights, per_atom)))
        return make_report("poincare", total, energy / lam, sigmas, {**meta, "method": "closed_form_gaussian"})

    energy = dirichlet_form(f, CollisionScene(xi, spec, spec), n_mc, seed)
    total = _variance(spec, f, n_mc, seed, "poincare_total")
    return make_report("poincare", total, _scaled(energy, 1.0 / lam), sigmas, {**meta, "method": "dirichlet_form"})
