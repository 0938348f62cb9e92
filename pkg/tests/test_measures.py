"""Tests for measure specs, Gaussian relative entropy and splitting."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from splitkit.core.error_handler import DimensionMismatchError, InsufficientSamplesError, ValidationError
from splitkit.measures import (
    CustomSpec,
    EmpiricalSpec,
    GaussianMeasure,
    GaussianSpec,
    MixtureSpec,
    ProductSpec,
    appendix_mixture_spec,
    covariance_split_defect,
    distribution_spec,
    empirical_split_test,
    energy_two_sample_test,
    gaussian_kl,
    log_moment_status,
    marginal_gaussian,
    sample,
    sample_split_report,
    splits_along,
    splits_wrt,
)
from splitkit.subspaces import (
    coordinate_subspace,
    independent_decomposition,
    point_mass,
    random_subspace,
    subspace_from_spanning_set,
)


def rotated_cov(degrees: float = 30.0) -> np.ndarray:
    a = np.deg2rad(degrees)
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return R @ np.diag([1.0, 4.0]) @ R.T


def random_gaussian(rng, n):
    A = rng.standard_normal((n, n))
    return GaussianMeasure(rng.standard_normal(n), A @ A.T + 0.1 * np.eye(n))


class TestGaussian:
    def test_identical_measures(self):
        g = GaussianMeasure.standard(3)
        assert gaussian_kl(g, g) == 0.0

    def test_shifted_mean(self):
        theta = np.array([2.0, -2.0])
        assert gaussian_kl(GaussianMeasure.isotropic(theta), GaussianMeasure.standard(2)) == pytest.approx(4.0)

    def test_scaled_variance(self):
        p = GaussianMeasure([0.0], [[2.0]])
        q = GaussianMeasure([0.0], [[1.0]])
        assert gaussian_kl(p, q) == pytest.approx(0.5 * (2.0 - 1.0 - np.log(2.0)))
        assert gaussian_kl(p, q) == pytest.approx(0.153426, abs=1e-6)

    def test_singular_reference_is_infinite(self):
        p = GaussianMeasure.standard(2)
        q = GaussianMeasure(np.zeros(2), np.diag([1.0, 0.0]))
        assert gaussian_kl(p, q) == float("inf")

    def test_mean_outside_common_range_is_infinite(self):
        p = GaussianMeasure([0.0, 1.0], np.diag([1.0, 0.0]))
        q = GaussianMeasure([0.0, 0.0], np.diag([1.0, 0.0]))
        assert gaussian_kl(p, q) == float("inf")

    def test_degenerate_pair_on_common_range(self):
        p = GaussianMeasure([1.0, 0.0], np.diag([2.0, 0.0]))
        q = GaussianMeasure([0.0, 0.0], np.diag([1.0, 0.0]))
        assert gaussian_kl(p, q) == pytest.approx(0.5 * (2.0 + 1.0 - 1.0 - np.log(2.0)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            gaussian_kl(GaussianMeasure.standard(2), GaussianMeasure.standard(3))

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(ValidationError):
            GaussianMeasure([0.0, 0.0], [[1.0, 0.3], [0.2, 1.0]])

    def test_singular_sampling_stays_in_range(self, rng):
        g = GaussianMeasure([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])
        x = g.sample(rng, 500)
        np.testing.assert_allclose(x[:, 0], x[:, 1], atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(1, 5), data=st.data())
    def test_nonnegative_and_data_processing(self, seed, n, data):
        rng = np.random.default_rng(seed)
        p, q = random_gaussian(rng, n), random_gaussian(rng, n)
        S = random_subspace(n, data.draw(st.integers(1, n)), rng)
        full = gaussian_kl(p, q)
        assert full >= 0.0
        assert gaussian_kl(marginal_gaussian(p, S), marginal_gaussian(q, S)) <= full + 1e-9


class TestMarginal:
    def test_standard_stays_standard(self, rng):
        S = random_subspace(4, 2, rng)
        m = marginal_gaussian(GaussianMeasure.standard(4), S)
        np.testing.assert_allclose(m.cov, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(m.mean, 0.0, atol=1e-12)

    def test_coordinate_marginal(self):
        m = marginal_gaussian(GaussianMeasure.isotropic([1.0, 2.0]), coordinate_subspace([0], 2))
        assert m.mean.tolist() == [1.0]
        assert m.cov.tolist() == [[1.0]]

    def test_diagonal_marginal(self):
        S = subspace_from_spanning_set([(1, 1)])
        m = marginal_gaussian(GaussianMeasure([0.0, 0.0], np.diag([1.0, 4.0])), S)
        assert m.cov[0, 0] == pytest.approx(2.5)


class TestSampling:
    def test_standard_gaussian_mean(self):
        x = sample(GaussianSpec.standard(2), 100_000, seed=1)
        assert np.all(np.abs(x.mean(axis=0)) < 4 / np.sqrt(100_000))

    def test_reproducible(self):
        spec = distribution_spec("laplace", 3)
        np.testing.assert_array_equal(sample(spec, 50, seed=9), sample(spec, 50, seed=9))

    def test_count_must_be_positive(self):
        with pytest.raises(ValidationError):
            sample(GaussianSpec.standard(2), 0)

    def test_mixture_of_gaussian_is_gaussian(self, bernstein_xi):
        gamma = GaussianSpec.standard(2)
        mixed = sample(MixtureSpec(bernstein_xi, gamma), 3000, seed=2)
        direct = sample(gamma, 3000, seed=3)
        assert energy_two_sample_test(mixed, direct, level=0.01, seed=4).passed

    def test_mixture_moments(self, axis_xi):
        base = GaussianSpec.of([1.0, 0.0], rotated_cov())
        mean, cov = MixtureSpec(axis_xi, base).moments()
        np.testing.assert_allclose(mean, [1.0, 0.0])
        assert cov[0, 1] == pytest.approx(0.0, abs=1e-12)
        assert cov[0, 0] == pytest.approx(rotated_cov()[0, 0])

    def test_mixture_dimension_checked(self, axis_xi):
        with pytest.raises(DimensionMismatchError):
            MixtureSpec(axis_xi, GaussianSpec.standard(3))

    def test_product_over_efron_stein_decomposition(self, es_xi):
        decomposition = independent_decomposition(es_xi)
        uniform = distribution_spec("uniform", 1)
        spec = ProductSpec.over_decomposition(decomposition, [uniform] * 3)
        x = sample(spec, 100_000, seed=5)
        corr = np.corrcoef(x.T)
        assert np.max(np.abs(corr - np.eye(3))) < 0.02
        np.testing.assert_allclose(np.abs(x).max(axis=0), 1.0, atol=1e-3)

    def test_product_factor_dims_checked(self, es_xi):
        decomposition = independent_decomposition(es_xi)
        with pytest.raises(DimensionMismatchError):
            ProductSpec.over_decomposition(decomposition, [GaussianSpec.standard(2)] * 3)

    def test_empirical_needs_samples(self):
        with pytest.raises(InsufficientSamplesError):
            EmpiricalSpec(np.zeros((0, 2)))

    def test_empirical_csv_with_header(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x,y\n1,2\n3,4\n", encoding="utf-8")
        spec = EmpiricalSpec.from_csv(path)
        assert spec.dim == 2
        assert set(map(tuple, sample(spec, 20, seed=0).tolist())) <= {(1.0, 2.0), (3.0, 4.0)}

    def test_custom_sampler_shape_checked(self, rng):
        spec = CustomSpec(lambda g, count: g.standard_normal((count, 3)), 2)
        with pytest.raises(DimensionMismatchError):
            spec.draw(rng, 4)

    def test_unknown_law(self):
        with pytest.raises(ValidationError):
            distribution_spec("zipf-ish", 2)

    def test_appendix_mixture_dimension(self):
        spec = appendix_mixture_spec(0.3, distribution_spec("uniform", 1), distribution_spec("uniform", 1))
        assert spec.dim == 2
        assert sample(spec, 10, seed=0).shape == (10, 2)


class TestSplitDefect:
    def test_standard_gaussian_splits_everywhere(self, bernstein_xi):
        defect = covariance_split_defect(GaussianSpec.standard(2), bernstein_xi)
        assert defect.exact and defect.passed
        assert defect.cross_norm == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_covariance_along_axis(self, axis_xi):
        defect = covariance_split_defect(GaussianSpec.of([0, 0], np.diag([1.0, 4.0])), axis_xi)
        assert defect.cross_norm == pytest.approx(0.0, abs=1e-12)

    def test_rotated_covariance(self, axis_xi):
        defect = covariance_split_defect(GaussianSpec.of([0, 0], rotated_cov()), axis_xi)
        assert defect.cross_norm == pytest.approx(1.5 * np.sin(np.deg2rad(60.0)), abs=1e-10)
        assert defect.cross_norm == pytest.approx(1.29904, abs=1e-5)
        assert not defect.passed

    def test_cross_norm_is_weighted_sum(self, bernstein_xi):
        defect = covariance_split_defect(GaussianSpec.of([0, 0], rotated_cov()), bernstein_xi)
        total = sum(w * v for (_, v), w in zip(defect.per_atom, bernstein_xi.weights))
        assert defect.cross_norm == pytest.approx(total, abs=1e-12)

    def test_sampled_defect_for_opaque_measure(self, axis_xi):
        spec = CustomSpec(lambda g, count: g.laplace(size=(count, 2)), 2)
        defect = covariance_split_defect(spec, axis_xi, count=20_000, seed=1)
        assert not defect.exact
        assert defect.pvalues is not None and len(defect.pvalues) == 1


class TestSplitTests:
    def test_gaussian_passes(self):
        x = sample(GaussianSpec.standard(2), 4000, seed=11)
        assert empirical_split_test(x, coordinate_subspace([0], 2), seed=1).passed

    def test_duplicated_uniform_fails(self, rng):
        u = rng.uniform(size=4000)
        result = empirical_split_test(np.column_stack([u, u]), coordinate_subspace([0], 2), seed=2)
        assert not result.passed

    def test_diagonal_of_iid_gaussians_passes(self):
        x = sample(GaussianSpec.standard(2), 4000, seed=12)
        assert empirical_split_test(x, subspace_from_spanning_set([(1, 1)]), seed=3).passed

    def test_rotated_gaussian_fails(self):
        x = sample(GaussianSpec.of([0, 0], rotated_cov()), 100_000, seed=13)
        assert not empirical_split_test(x, coordinate_subspace([0], 2), seed=4).passed

    def test_non_gaussian_cannot_split_along_bernstein_pair(self, bernstein_xi):
        x = sample(distribution_spec("uniform", 2), 100_000, seed=14)
        results = [empirical_split_test(x, E, seed=5 + i) for i, E in enumerate(bernstein_xi.atoms)]
        assert any(not r.passed for r in results)
        assert independent_decomposition(bernstein_xi).dependent.dim == 2

    def test_needs_enough_samples(self):
        with pytest.raises(InsufficientSamplesError):
            empirical_split_test(np.zeros((10, 2)), coordinate_subspace([0], 2))

    def test_trivial_split(self):
        x = sample(GaussianSpec.standard(2), 2000, seed=15)
        result = empirical_split_test(x, coordinate_subspace([0, 1], 2))
        assert result.passed and result.cross_pvalue == 1.0

    def test_sample_split_report_per_atom(self, es_xi):
        results = sample_split_report(GaussianSpec.standard(3), es_xi, count=3000, seed=6)
        assert len(results) == 3
        assert all(r.passed for r in results)

    def test_product_with_gaussian_dependent_factor_splits(self):
        xi = point_mass(coordinate_subspace([0], 3))
        decomposition = independent_decomposition(xi)
        spec = ProductSpec.over_decomposition(
            decomposition, [GaussianSpec.standard(2), distribution_spec("laplace", 1)]
        )
        assert splits_wrt(spec, xi) is True
        x = sample(spec, 4000, seed=7)
        assert empirical_split_test(x, xi.atoms[0], seed=8).passed


class TestAnalyticSplitting:
    def test_gaussian(self, axis_xi):
        assert splits_along(GaussianSpec.standard(2), axis_xi.atoms[0]) is True
        assert splits_along(GaussianSpec.of([0, 0], rotated_cov()), axis_xi.atoms[0]) is False

    def test_iid_coordinates_on_coordinate_subspace(self):
        spec = distribution_spec("uniform", 2)
        assert splits_along(spec, coordinate_subspace([1], 2)) is True
        assert splits_along(spec, subspace_from_spanning_set([(1, 1)])) is None

    def test_empirical_is_undecidable(self, axis_xi):
        spec = EmpiricalSpec(np.eye(2))
        assert splits_along(spec, axis_xi.atoms[0]) is None
        assert splits_wrt(spec, axis_xi) is None

    def test_splits_wrt_reports_failure(self, bernstein_xi):
        assert splits_wrt(GaussianSpec.of([0, 0], rotated_cov()), bernstein_xi) is False


class TestLogMoment:
    def test_gaussian_finite(self):
        assert log_moment_status(GaussianSpec.standard(2)) == "finite"

    def test_scipy_law_finite(self):
        assert log_moment_status(distribution_spec("t", 2, df=3)) == "finite"

    def test_empirical_untestable(self):
        assert log_moment_status(EmpiricalSpec(np.eye(2))) == "untestable"

    def test_mixture_inherits_base(self, axis_xi):
        assert log_moment_status(MixtureSpec(axis_xi, GaussianSpec.standard(2))) == "finite"
        assert log_moment_status(MixtureSpec(axis_xi, EmpiricalSpec(np.eye(2)))) == "untestable"

    def test_custom_law_uses_scipy_expectation(self):
        spec = CustomSpec.from_scipy(stats.laplace(), 2)
        assert log_moment_status(spec) == "finite"
