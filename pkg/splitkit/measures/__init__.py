"""Measures on R^n: Gaussians, products over a decomposition, the xi-mixture,
empirical and sampler-based measures, and splitting tests."""

from .gaussian import GaussianMeasure, gaussian_kl, marginal_gaussian, split_cross_norm
from .spec import (
    MeasureSpec,
    GaussianSpec,
    ProductSpec,
    MixtureSpec,
    EmpiricalSpec,
    CustomSpec,
    distribution_spec,
    appendix_mixture_spec,
    sample,
)
from .splitting import (
    SplitDefect,
    SplitTestResult,
    TwoSampleResult,
    covariance_split_defect,
    empirical_split_test,
    energy_two_sample_test,
    splits_along,
    splits_wrt,
    log_moment_status,
    sample_split_report,
)

__all__ = [
    "GaussianMeasure",
    "gaussian_kl",
    "marginal_gaussian",
    "split_cross_norm",
    "MeasureSpec",
    "GaussianSpec",
    "ProductSpec",
    "MixtureSpec",
    "EmpiricalSpec",
    "CustomSpec",
    "distribution_spec",
    "appendix_mixture_spec",
    "sample",
    "SplitDefect",
    "SplitTestResult",
    "TwoSampleResult",
    "covariance_split_defect",
    "empirical_split_test",
    "energy_two_sample_test",
    "splits_along",
    "splits_wrt",
    "log_moment_status",
    "sample_split_report",
]
