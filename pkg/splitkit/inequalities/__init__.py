"""Closed-form and Monte Carlo verification of the variance and entropy
inequalities, with SlackReports and a manifest-driven suite runner."""

from .report import (
    HOLDS,
    VIOLATED,
    INCONCLUSIVE,
    SlackReport,
    make_report,
    inapplicable,
    bonferroni_sigmas,
)
from .conditional import (
    ConditionalVarianceEstimate,
    conditional_mean_variance,
    gaussian_function_variance,
    gaussian_conditional_variance,
)
from .checks import (
    check_linearized_bl,
    check_bl_split,
    check_efron_stein,
    check_dks,
    check_madiman_barron,
    check_jensen_improvement,
    check_poincare,
)
from .tails import TailDiagnostic, tail_ratio_diagnostic
from .suite import CHECKS, SuiteContext, run_suite, any_violated

__all__ = [
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
    "SlackReport",
    "make_report",
    "inapplicable",
    "bonferroni_sigmas",
    "ConditionalVarianceEstimate",
    "conditional_mean_variance",
    "gaussian_function_variance",
    "gaussian_conditional_variance",
    "check_linearized_bl",
    "check_bl_split",
    "check_efron_stein",
    "check_dks",
    "check_madiman_barron",
    "check_jensen_improvement",
    "check_poincare",
    "TailDiagnostic",
    "tail_ratio_diagnostic",
    "CHECKS",
    "SuiteContext",
    "run_suite",
    "any_violated",
]
