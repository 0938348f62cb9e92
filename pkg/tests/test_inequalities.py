"""Tests for slack reports, conditional variances, the inequality checks and the suite."""

import math

import numpy as np
import pytest

from splitkit.core.error_handler import (
    InsufficientSamplesError,
    PreconditionError,
    UnsupportedOperationError,
    ValidationError,
)
from splitkit.functions import (
    Constant,
    CoordinateMax,
    CoordinateProduct,
    LinearFunctional,
    QuadraticForm,
    coordinate,
    coordinate_sum,
    norm_squared,
)
from splitkit.inequalities import (
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    SuiteContext,
    any_violated,
    bonferroni_sigmas,
    check_bl_split,
    check_dks,
    check_efron_stein,
    check_jensen_improvement,
    check_linearized_bl,
    check_madiman_barron,
    check_poincare,
    conditional_mean_variance,
    gaussian_conditional_variance,
    inapplicable,
    make_report,
    run_suite,
    tail_ratio_diagnostic,
)
from splitkit.core.stats import MonteCarloEstimate
from splitkit.measures import GaussianMeasure, GaussianSpec, distribution_spec, sample
from splitkit.subspaces import coordinate_subspace, mean_projector

from .conftest import BERNSTEIN_LAMBDA
from .test_measures import rotated_cov


def gaussian_components(k):
    return [GaussianSpec.standard(1) for _ in range(k)]


class TestReport:
    def test_exact_sides_use_tiny_margin(self):
        report = make_report("r", 1.0, 1.0 + 1e-12)
        assert report.verdict == HOLDS
        assert report.tight
        assert report.exact
        assert report.margin == pytest.approx(1e-10)

    def test_exact_violation(self):
        assert make_report("r", 2.0, 1.0).verdict == VIOLATED

    def test_monte_carlo_margin(self):
        lhs = MonteCarloEstimate(1.1, 0.03, 1000)
        rhs = MonteCarloEstimate(1.0, 0.04, 1000)
        report = make_report("r", lhs, rhs, sigmas=3.0)
        assert report.margin == pytest.approx(0.15)
        assert report.verdict == HOLDS
        assert report.tight

    def test_infinite_rhs_holds(self):
        assert make_report("r", 5.0, math.inf).verdict == HOLDS

    def test_nan_is_inconclusive(self):
        assert make_report("r", math.nan, 1.0).verdict == INCONCLUSIVE

    def test_inapplicable(self):
        report = inapplicable("poincare", "lambda is zero")
        assert report.verdict == INCONCLUSIVE
        assert report.metadata["inapplicable"] == "lambda is zero"
        assert report.to_dict()["lhs"] == "nan"

    def test_bonferroni(self):
        assert bonferroni_sigmas(0.01, 1) == 3.0
        assert bonferroni_sigmas(0.01, 2) == 3.0
        assert bonferroni_sigmas(0.01, 100) > 3.0


class TestConditionalVariance:
    def test_closed_form_linear(self):
        # Var(E[x0 + x1 | x0]) = 1 for independent standard coordinates
        est = conditional_mean_variance(GaussianSpec.standard(2), coordinate_subspace([0], 2), coordinate_sum(2))
        assert est.method == "closed_form_gaussian"
        assert est.value == pytest.approx(1.0)
        assert est.expected_variance.value == pytest.approx(1.0)
        assert est.se == 0.0

    def test_closed_form_with_correlation(self):
        cov = rotated_cov()
        g = GaussianMeasure(np.zeros(2), cov)
        value = gaussian_conditional_variance(g, coordinate_subspace([0], 2), np.zeros((2, 2)), np.array([0.0, 1.0]))
        assert value == pytest.approx(cov[0, 1] ** 2 / cov[0, 0])

    def test_resampling_matches_closed_form(self):
        spec = GaussianSpec.standard(2)
        S = coordinate_subspace([0], 2)
        f = QuadraticForm(np.array([[1.0, 0.5], [0.5, 0.0]]))
        exact = conditional_mean_variance(spec, S, f)
        est = conditional_mean_variance(spec, S, f, n_outer=4000, n_inner=100, seed=1, method="resample_nested")
        assert est.method == "resample_nested"
        assert abs(est.value - exact.value) <= 4 * est.se + est.bias_bound

    def test_binned_without_splitting(self):
        cov = rotated_cov()
        spec = GaussianSpec.of([0.0, 0.0], cov)
        est = conditional_mean_variance(
            spec, coordinate_subspace([0], 2), coordinate(1, 2), n_outer=200, n_inner=200, seed=2, method="binned"
        )
        assert est.value == pytest.approx(cov[0, 1] ** 2 / cov[0, 0], abs=0.05)

    def test_resampling_refuses_non_splitting_measure(self):
        spec = GaussianSpec.of([0.0, 0.0], rotated_cov())
        with pytest.raises(PreconditionError):
            conditional_mean_variance(spec, coordinate_subspace([0], 2), coordinate(1, 2), method="resample_nested")

    def test_constant_function(self):
        est = conditional_mean_variance(GaussianSpec.standard(2), coordinate_subspace([0], 2), Constant(3.0))
        assert est.value == 0.0 and est.total_variance.value == 0.0

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            conditional_mean_variance(GaussianSpec.standard(1), coordinate_subspace([0], 1), coordinate(0, 1), method="magic")


class TestLinearizedBL:
    def test_top_eigenvector_is_tight(self, bernstein_xi):
        u = mean_projector(bernstein_xi).top_eigenvector
        mean_form, variance_form = check_linearized_bl(GaussianSpec.standard(2), bernstein_xi, LinearFunctional(u))
        assert mean_form.verdict == HOLDS and mean_form.tight
        assert mean_form.lhs == pytest.approx(1.0 - BERNSTEIN_LAMBDA)
        assert variance_form.verdict == HOLDS

    def test_quadratic_on_efron_stein(self, es_xi):
        reports = check_linearized_bl(GaussianSpec.standard(3), es_xi, norm_squared(3))
        assert [r.verdict for r in reports] == [HOLDS, HOLDS]
        assert all(r.exact for r in reports)

    def test_monte_carlo_for_non_quadratic(self, es_xi):
        spec = distribution_spec("laplace", 3)
        reports = check_linearized_bl(spec, es_xi, CoordinateMax(), n_outer=1000, n_inner=50, seed=3, n_direct=20_000)
        assert all(r.verdict == HOLDS for r in reports)
        assert reports[0].metadata["methods"] == ["resample_nested"]

    def test_non_splitting_measure(self, axis_xi):
        with pytest.raises(PreconditionError):
            check_linearized_bl(GaussianSpec.of([0.0, 0.0], rotated_cov()), axis_xi, coordinate(0, 2))

    def test_zero_lambda_variance_form_is_inapplicable(self, axis_xi):
        _, variance_form = check_linearized_bl(GaussianSpec.standard(2), axis_xi, coordinate(1, 2))
        assert variance_form.verdict == INCONCLUSIVE
        assert "inapplicable" in variance_form.metadata


class TestBLSplit:
    def test_shifted_gaussian(self, bernstein_xi):
        report = check_bl_split(GaussianMeasure.standard(2), bernstein_xi, GaussianMeasure.isotropic([2.0, 2.0]))
        assert report.lhs == pytest.approx(3.0)
        assert report.rhs == pytest.approx((1.0 - BERNSTEIN_LAMBDA) * 4.0)
        assert report.verdict == HOLDS

    def test_shift_along_top_eigenvector_is_tight(self, bernstein_xi):
        u = mean_projector(bernstein_xi).top_eigenvector
        report = check_bl_split(GaussianMeasure.standard(2), bernstein_xi, GaussianMeasure.isotropic(3.0 * u))
        assert report.tight

    def test_singular_nu_gives_infinite_rhs(self, bernstein_xi):
        nu = GaussianMeasure(np.zeros(2), np.diag([1.0, 0.0]))
        report = check_bl_split(GaussianMeasure.standard(2), bernstein_xi, nu)
        assert report.verdict == HOLDS
        assert report.metadata["rhs_infinite"]

    def test_non_splitting_reference(self, axis_xi):
        with pytest.raises(PreconditionError):
            check_bl_split(GaussianMeasure(np.zeros(2), rotated_cov()), axis_xi, GaussianMeasure.standard(2))

    def test_non_gaussian_reference(self, bernstein_xi):
        with pytest.raises(UnsupportedOperationError):
            check_bl_split(distribution_spec("laplace", 2), bernstein_xi, GaussianMeasure.standard(2))


class TestEfronStein:
    def test_product_of_coordinates(self):
        report = check_efron_stein(
            gaussian_components(3), CoordinateProduct((0, 1, 2)), n_outer=1000, n_inner=50, seed=4, n_direct=50_000
        )
        assert report.verdict == HOLDS
        assert report.rhs == pytest.approx(3.0, abs=0.3)

    def test_additive_function_is_tight(self):
        report = check_efron_stein(gaussian_components(3), coordinate_sum(3))
        assert report.tight and report.lhs == pytest.approx(3.0)

    def test_components_must_be_scalar(self):
        with pytest.raises(ValidationError):
            check_efron_stein([GaussianSpec.standard(2)], coordinate(0, 2))


class TestDKS:
    def test_square_closed_form(self):
        report = check_dks(GaussianSpec.standard(1), "square", 4, 2)
        assert report.lhs == pytest.approx(8.0)
        assert report.rhs == pytest.approx(16.0)
        assert report.verdict == HOLDS

    def test_identity_is_tight(self):
        report = check_dks(GaussianSpec.standard(1), "identity", 5, 3)
        assert report.tight

    def test_uniform_base_by_simulation(self):
        base = distribution_spec("uniform", 1)
        report = check_dks(base, "square", 4, 2, n_outer=2000, n_inner=100, seed=5, n_direct=50_000)
        assert report.verdict == HOLDS
        assert report.metadata["method"] == "resample_nested"

    def test_m_cannot_exceed_n(self):
        with pytest.raises(ValidationError):
            check_dks(GaussianSpec.standard(1), "square", 2, 3)


class TestMadimanBarron:
    def test_pair_products(self):
        pair = CoordinateProduct((0, 1))
        report = check_madiman_barron(gaussian_components(3), [[0, 1], [1, 2], [0, 2]], 2, [pair, pair, pair])
        assert report.verdict == HOLDS
        assert report.lhs == pytest.approx(3.0)
        assert report.rhs == pytest.approx(6.0)

    def test_uncovered_indices_are_flagged(self):
        report = check_madiman_barron(gaussian_components(3), [[0, 1]], 1, [coordinate_sum(2)])
        assert report.metadata["uncovered"] == [2]
        assert "flag" in report.metadata

    def test_one_function_per_member(self):
        with pytest.raises(ValidationError):
            check_madiman_barron(gaussian_components(3), [[0, 1], [1, 2]], 2, [coordinate_sum(2)])


class TestJensenImprovement:
    def test_top_eigenvector_is_tight(self, bernstein_xi):
        u = LinearFunctional(mean_projector(bernstein_xi).top_eigenvector)
        report = check_jensen_improvement(GaussianSpec.standard(2), bernstein_xi, [u, u])
        assert report.tight
        assert report.lhs == pytest.approx((1.0 - BERNSTEIN_LAMBDA) ** 2)

    def test_monte_carlo_path(self, es_xi):
        spec = distribution_spec("laplace", 3)
        psi = [CoordinateMax(), CoordinateMax(), CoordinateMax()]
        report = check_jensen_improvement(spec, es_xi, psi, n_mc=50_000, seed=6)
        assert report.verdict == HOLDS
        assert report.metadata["method"] == "direct"

    def test_function_count(self, bernstein_xi):
        with pytest.raises(ValidationError):
            check_jensen_improvement(GaussianSpec.standard(2), bernstein_xi, [coordinate(0, 2)])


class TestPoincare:
    def test_linear_is_tight_for_efron_stein(self, es_xi):
        report = check_poincare(GaussianSpec.standard(3), es_xi, LinearFunctional([1.0, 2.0, -1.0]))
        assert report.tight
        assert report.lhs == pytest.approx(6.0)

    def test_dirichlet_form_path(self, es_xi):
        report = check_poincare(distribution_spec("laplace", 3), es_xi, CoordinateMax(), n_mc=50_000, seed=7)
        assert report.verdict == HOLDS
        assert report.metadata["method"] == "dirichlet_form"

    def test_zero_lambda(self, axis_xi):
        report = check_poincare(GaussianSpec.standard(2), axis_xi, coordinate(0, 2))
        assert report.verdict == INCONCLUSIVE


class TestTailRatio:
    def test_gaussian_tails_hold(self):
        samples = sample(GaussianSpec.standard(2), 20_000, seed=8)
        diagnostic = tail_ratio_diagnostic(samples, 0.5, 0.9)
        assert diagnostic.verdict == HOLDS
        assert diagnostic.t0 is not None
        assert diagnostic.to_report().verdict == HOLDS

    def test_cauchy_tails_violate_a_strict_ratio(self):
        samples = sample(distribution_spec("cauchy", 2), 20_000, seed=9)
        assert tail_ratio_diagnostic(samples, 0.5, 0.5).verdict == VIOLATED

    def test_needs_enough_samples(self):
        with pytest.raises(InsufficientSamplesError):
            tail_ratio_diagnostic(np.zeros((100, 2)), 0.5, 0.9)

    def test_constants_must_be_probabilities(self):
        with pytest.raises(ValidationError):
            tail_ratio_diagnostic(np.ones((10_000, 2)), 1.5, 0.9)

    def test_ratios_below_the_grid_are_masked(self):
        samples = sample(GaussianSpec.standard(2), 60_000, seed=10)
        diagnostic = tail_ratio_diagnostic(samples, 0.5, 0.9, t_grid=[1.0, 2.0, 4.0, 8.0])
        ratios = diagnostic.ratios()
        assert np.isnan(ratios[0])
        # chi-square with 2 dof: P(R > t) = exp(-t/2)
        np.testing.assert_allclose(ratios[1:3], [np.exp(-0.5), np.exp(-1.0)], rtol=0.05)


class TestSuite:
    @pytest.fixture
    def context(self, bernstein_xi):
        return SuiteContext(
            bernstein_xi,
            {"bath": GaussianSpec.standard(2), "unit": GaussianSpec.standard(1), "laplace": distribution_spec("laplace", 2)},
        )

    @pytest.fixture
    def manifest(self):
        return [
            {"check": "linearized_bl", "name": "sum", "f": {"kind": "sum"}},
            {"check": "bl_split", "nu": {"mean": [2.0, 2.0]}},
            {"check": "dks", "base": "unit", "g": "square", "n": 4, "m": 2},
            {"check": "efron_stein", "components": ["unit", "unit"], "f": {"kind": "product", "indices": [0, 1]}, "n_outer": 300, "n_inner": 30},
            {"check": "poincare", "f": {"kind": "norm_sq"}},
            {"check": "tail_ratio", "measure": "laplace", "c": 0.5, "C": 0.9, "n_samples": 20_000},
        ]

    def test_reports_keep_manifest_order(self, context, manifest):
        reports = run_suite(manifest, context, seed=1)
        indices = [r.metadata["manifest_index"] for r in reports]
        assert indices == sorted(indices)
        assert reports[0].metadata["label"] == "sum"
        assert [r.name for r in reports][:3] == [
            "linearized_bl_conditional_mean",
            "linearized_bl_conditional_variance",
            "bl_split",
        ]
        assert not any_violated(reports)

    def test_worker_count_does_not_change_reports(self, context, manifest):
        one = [r.to_dict() for r in run_suite(manifest, context, seed=2, jobs=1)]
        many = [r.to_dict() for r in run_suite(manifest, context, seed=2, jobs=4)]
        assert one == many

    def test_unknown_check(self, context):
        with pytest.raises(ValidationError):
            run_suite([{"check": "sobolev"}], context)

    def test_unknown_measure(self, context):
        with pytest.raises(ValidationError):
            run_suite([{"check": "poincare", "measure": "missing", "f": {"kind": "sum"}}], context)

    def test_inline_measure_needs_resolver(self, context):
        with pytest.raises(ValidationError):
            run_suite([{"check": "dks", "base": {"kind": "gaussian", "mean": [0], "cov": [[1]]}, "n": 2, "m": 1}], context)

    def test_bonferroni_family_counts_every_report(self, context):
        manifest = [
            {"check": "linearized_bl", "f": {"kind": "coordinate", "index": 0}},
            {"check": "linearized_bl", "f": {"kind": "sum"}},
            {"check": "linearized_bl", "f": {"kind": "norm_sq"}},
        ]
        reports = run_suite(manifest, context, seed=3, level=0.01, sigmas=1.0)
        assert len(reports) == 6
        expected = bonferroni_sigmas(0.01, 6, 1.0)
        assert expected > bonferroni_sigmas(0.01, 3, 1.0)
        assert all(r.metadata["sigmas"] == pytest.approx(expected) for r in reports)

    def test_mixed_manifest_family_size(self, context, manifest):
        reports = run_suite(manifest, context, seed=4, level=0.01, sigmas=1.0)
        assert len(reports) == len(manifest) + 1
        assert reports[-1].metadata["sigmas"] == pytest.approx(bonferroni_sigmas(0.01, len(reports), 1.0))
