"""Tests for seeds, the task pool, validators, estimates and error handling."""

import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitkit.core.error_handler import (
    EXIT_BUDGET,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_UNSUPPORTED,
    EXIT_VALIDATION,
    BudgetExceededError,
    DimensionMismatchError,
    PreconditionError,
    UnsupportedOperationError,
    ValidationError,
    get_error_response,
    handle_errors,
)
from splitkit.core.logger import ContextualJsonFormatter, get_logger
from splitkit.core.parallel import chunk_sizes, run_tasks
from splitkit.core.rng import as_generator, child_seed, substream
from splitkit.core.stats import (
    MomentAccumulator,
    covariance_with_se,
    mean_with_se,
    nested_moments,
    variance_with_se,
)
from splitkit.core.validators import ArrayValidator, CoverValidator


class TestSubstreams:
    def test_same_key_same_stream(self):
        a = substream(5, "simulate", 3).standard_normal(8)
        b = substream(5, "simulate", 3).standard_normal(8)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("other", [(6, "simulate", 3), (5, "propagate", 3), (5, "simulate", 4)])
    def test_any_key_change_gives_new_stream(self, other):
        a = substream(5, "simulate", 3).standard_normal(8)
        b = substream(*other).standard_normal(8)
        assert not np.allclose(a, b)

    def test_child_seed_is_63_bit_and_stable(self):
        s = child_seed(1, "suite", 0)
        assert 0 <= s < 2**63
        assert s == child_seed(1, "suite", 0)
        assert s != child_seed(1, "suite", 1)

    def test_as_generator_passes_generators_through(self):
        g = np.random.default_rng(0)
        assert as_generator(g) is g
        np.testing.assert_array_equal(as_generator(None).random(3), as_generator(0).random(3))


class TestParallel:
    @pytest.mark.parametrize("jobs", [1, 2, 8])
    def test_results_keep_task_order(self, jobs):
        assert run_tasks(lambda i: i * i, 10, jobs) == [i * i for i in range(10)]

    def test_no_tasks(self):
        assert run_tasks(lambda i: i, 0, 4) == []

    @given(total=st.integers(min_value=0, max_value=20_000), chunk=st.integers(min_value=1, max_value=5000))
    def test_chunk_sizes_cover_total(self, total, chunk):
        sizes = chunk_sizes(total, chunk)
        assert sum(sizes) == total
        assert all(0 < s <= chunk for s in sizes)
        assert all(s == chunk for s in sizes[:-1])


class TestValidators:
    def test_vector_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            ArrayValidator.vector([1.0, 2.0], 3, "x")

    def test_vector_rejects_nan(self):
        with pytest.raises(ValidationError) as exc:
            ArrayValidator.vector([1.0, np.nan])
        assert exc.value.code == "NON_FINITE"

    def test_covariance_must_be_psd(self):
        with pytest.raises(ValidationError) as exc:
            ArrayValidator.covariance([[1.0, 2.0], [2.0, 1.0]])
        assert exc.value.code == "NOT_PSD"

    def test_covariance_must_be_symmetric(self):
        with pytest.raises(ValidationError) as exc:
            ArrayValidator.covariance([[1.0, 0.5], [0.0, 1.0]])
        assert exc.value.code == "NOT_SYMMETRIC"

    def test_weights_must_be_normalized(self):
        with pytest.raises(ValidationError) as exc:
            ArrayValidator.weights([0.5, 0.6])
        assert exc.value.code == "NOT_NORMALIZED"

    def test_samples_promotes_1d(self):
        assert ArrayValidator.samples([1.0, 2.0, 3.0]).shape == (3, 1)

    def test_cover_reports_uncovered_indices(self):
        result = CoverValidator.validate([[0, 1], [1, 2]], 4, 2)
        assert result["uncovered"] == [3]
        assert result["counts"].tolist() == [1, 2, 1, 0]

    def test_cover_rejects_excess_multiplicity(self):
        with pytest.raises(ValidationError) as exc:
            CoverValidator.validate([[0, 1], [0, 2], [0]], 3, 2)
        assert exc.value.code == "NOT_AN_R_COVER"


class TestStats:
    def test_mean_with_se(self):
        est = mean_with_se([1.0, 2.0, 3.0, 4.0])
        assert est.value == pytest.approx(2.5)
        assert est.se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)

    def test_single_draw_is_unstable(self):
        est = mean_with_se([3.0])
        assert est.unstable and np.isinf(est.se)

    def test_variance_and_covariance(self, rng):
        x = rng.standard_normal(20_000)
        assert variance_with_se(2 * x).value == pytest.approx(4.0, abs=6 * variance_with_se(2 * x).se)
        cov = covariance_with_se(x, -x)
        assert cov.value == pytest.approx(-np.var(x, ddof=1))

    @settings(max_examples=30, deadline=None)
    @given(split=st.integers(min_value=1, max_value=59))
    def test_accumulator_merge_matches_batch(self, split):
        data = np.random.default_rng(split).standard_normal((60, 3))
        left = MomentAccumulator(3).update(data[:split])
        right = MomentAccumulator(3).update(data[split:])
        merged = left.merge(right)
        np.testing.assert_allclose(merged.mean, data.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(merged.covariance(), np.cov(data.T), atol=1e-12)

    def test_nested_moments_separates_between_and_within(self, rng):
        outer = rng.standard_normal((4000, 1)) * 2.0
        values = outer + rng.standard_normal((4000, 50))
        moments = nested_moments(values)
        assert moments.variance_of_mean.value == pytest.approx(4.0, abs=5 * moments.variance_of_mean.se)
        assert moments.expected_variance.value == pytest.approx(1.0, abs=5 * moments.expected_variance.se)


class TestErrors:
    @pytest.mark.parametrize(
        "error,exit_code",
        [
            (ValidationError("bad", "field"), EXIT_VALIDATION),
            (PreconditionError("no split"), EXIT_PRECONDITION),
            (UnsupportedOperationError("continuous"), EXIT_UNSUPPORTED),
            (BudgetExceededError(1e9, 1e6), EXIT_BUDGET),
        ],
    )
    def test_handle_errors_maps_exit_codes(self, error, exit_code, capsys):
        @handle_errors
        def cmd(args):
            raise error

        assert cmd(None) == exit_code
        payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert payload["exit_code"] == exit_code
        assert payload["success"] is False

    def test_unexpected_errors_are_internal(self, capsys):
        @handle_errors
        def cmd(args):
            raise RuntimeError("boom")

        assert cmd(None) == EXIT_INTERNAL
        payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert payload["code"] == "INTERNAL_ERROR"

    def test_success_passes_through(self):
        assert handle_errors(lambda args: EXIT_OK)(None) == EXIT_OK

    def test_user_facing_response_hides_details(self):
        assert get_error_response(KeyError("secret"))["error"] == "internal error"
        assert "secret" in get_error_response(KeyError("secret"), user_facing=False)["error"]

    def test_validation_error_records_field(self):
        err = ValidationError("bad", "scene.xi")
        assert get_error_response(err)["details"]["field"] == "scene.xi"


def test_json_formatter_includes_context():
    record = logging.LogRecord("splitkit.test", logging.INFO, __file__, 1, "event_name", (), None)
    record.extra_data = {"n": 3, "arr": np.arange(2)}
    payload = json.loads(ContextualJsonFormatter().format(record))
    assert payload["message"] == "event_name"
    assert payload["n"] == 3
    assert payload["arr"] == [0, 1]


def test_structured_logger_accepts_keyword_context():
    get_logger("splitkit.test").debug("quiet", value=1)
