"""Run a manifest of named checks against one scene.

A manifest is a list of entries ``{"check": <name>, ...parameters}``.
Each entry gets its own seed substream, all entries share a
Bonferroni-adjusted margin, and reports come back in manifest order
whatever the worker count.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .. import config
from ..core.error_handler import ValidationError
from ..core.logger import get_logger
from ..core.parallel import run_tasks
from ..core.rng import child_seed, substream
from ..functions import TestFunction, build_function
from ..measures.gaussian import GaussianMeasure
from ..measures.spec import MeasureSpec
from ..subspaces.distribution import SubspaceDistribution, cover_distribution
from .checks import (
    check_bl_split,
    check_dks,
    check_efron_stein,
    check_jensen_improvement,
    check_linearized_bl,
    check_madiman_barron,
    check_poincare,
)
from .report import VIOLATED, SlackReport, bonferroni_sigmas
from .tails import tail_ratio_diagnostic

logger = get_logger(__name__)

MeasureRef = Union[str, dict]


@dataclass
class SuiteContext:
    """What manifest entries can refer to: the scene's xi and named measures.

    ``resolve_measure`` turns an inline measure entry into a MeasureSpec;
    names are looked up in ``measures``.
    """

    xi: SubspaceDistribution
    measures: Dict[str, MeasureSpec] = field(default_factory=dict)
    resolve_inline: Optional[Callable[[dict], MeasureSpec]] = None

    @property
    def dim(self) -> int:
        return self.xi.ambient_dim

    def measure(self, ref: MeasureRef, field_name: str = "measure") -> MeasureSpec:
        if isinstance(ref, MeasureSpec):
            return ref
        if isinstance(ref, str):
            if ref not in self.measures:
                raise ValidationError(
                    f"unknown measure {ref!r}; scene defines {sorted(self.measures)}", field_name, "UNKNOWN_MEASURE"
                )
            return self.measures[ref]
        if isinstance(ref, Mapping) and self.resolve_inline is not None:
            return self.resolve_inline(dict(ref))
        raise ValidationError("measure must be a name or an inline measure", field_name, "BAD_MEASURE")

    def function(self, entry, n: Optional[int] = None, field_name: str = "f") -> TestFunction:
        if isinstance(entry, TestFunction):
            return entry
        if not isinstance(entry, Mapping):
            raise ValidationError("function entries are objects with a 'kind'", field_name, "BAD_FUNCTION")
        return build_function(dict(entry), self.dim if n is None else n)


def _budget(entry: dict, key: str, default: int) -> int:
    return int(entry.get(key, default))


def _linearized_bl(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    spec = ctx.measure(entry.get("measure", "bath"))
    return list(
        check_linearized_bl(
            spec,
            ctx.xi,
            ctx.function(entry["f"]),
            entry.get("lambda"),
            _budget(entry, "n_outer", config.N_OUTER),
            _budget(entry, "n_inner", config.N_INNER),
            seed,
            sigmas,
            entry.get("method", "auto"),
        )
    )


def _bl_split(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    mu = ctx.measure(entry.get("measure", "bath"))
    nu_entry = entry["nu"]
    if isinstance(nu_entry, Mapping) and "mean" in nu_entry and "kind" not in nu_entry:
        nu = GaussianMeasure(nu_entry["mean"], nu_entry.get("cov", np.eye(ctx.dim)))
    else:
        nu = ctx.measure(nu_entry, "nu")
    return [check_bl_split(mu, ctx.xi, nu, entry.get("lambda"))]


def _components(entry, ctx: SuiteContext) -> List[MeasureSpec]:
    comps = entry.get("components")
    if not comps:
        raise ValidationError("components are required", "components", "EMPTY")
    return [ctx.measure(c, f"components[{i}]") for i, c in enumerate(comps)]


def _efron_stein(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    comps = _components(entry, ctx)
    return [
        check_efron_stein(
            comps,
            ctx.function(entry["f"], len(comps)),
            _budget(entry, "n_outer", config.N_OUTER),
            _budget(entry, "n_inner", config.N_INNER),
            seed,
            sigmas,
        )
    ]


def _dks(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    base = ctx.measure(entry["base"], "base")
    return [
        check_dks(
            base,
            entry.get("g", "identity"),
            int(entry["n"]),
            int(entry["m"]),
            _budget(entry, "n_outer", config.N_OUTER),
            _budget(entry, "n_inner", config.N_INNER),
            seed,
            sigmas,
        )
    ]


def _madiman_barron(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    comps = _components(entry, ctx)
    cover = entry["cover"]
    psi = [ctx.function(p, len(member), f"psi[{i}]") for i, (p, member) in enumerate(zip(entry["psi"], cover))]
    return [
        check_madiman_barron(
            comps, cover, int(entry["r"]), psi, _budget(entry, "n_mc", config.N_DIRECT), seed, sigmas
        )
    ]


def _jensen_improvement(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    spec = ctx.measure(entry.get("measure", "bath"))
    xi = ctx.xi
    if "cover" in entry:
        xi = cover_distribution(entry["cover"], spec.dim, entry.get("weights"), entry.get("r"))
    psi = [ctx.function(p, spec.dim, f"psi[{i}]") for i, p in enumerate(entry["psi"])]
    return [
        check_jensen_improvement(
            spec, xi, psi, entry.get("lambda"), _budget(entry, "n_mc", config.N_DIRECT), seed, sigmas
        )
    ]


def _poincare(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    spec = ctx.measure(entry.get("measure", "bath"))
    return [
        check_poincare(
            spec, ctx.xi, ctx.function(entry["f"]), entry.get("lambda"),
            _budget(entry, "n_mc", config.N_DIRECT), seed, sigmas,
        )
    ]


def _tail_ratio(entry, ctx: SuiteContext, sigmas, seed) -> List[SlackReport]:
    spec = ctx.measure(entry.get("measure", "bath"))
    count = _budget(entry, "n_samples", config.N_DIRECT)
    samples = spec.draw(substream(seed, "tail_ratio", 0), count)
    diagnostic = tail_ratio_diagnostic(
        samples, float(entry["c"]), float(entry["C"]), entry.get("t_grid"), float(entry.get("level", config.DEFAULT_LEVEL))
    )
    return [diagnostic.to_report()]


CHECKS: Dict[str, Callable[..., List[SlackReport]]] = {
    "linearized_bl": _linearized_bl,
    "bl_split": _bl_split,
    "efron_stein": _efron_stein,
    "dks": _dks,
    "madiman_barron": _madiman_barron,
    "jensen_improvement": _jensen_improvement,
    "poincare": _poincare,
    "tail_ratio": _tail_ratio,
}

# reports emitted per entry; checks not listed emit one
REPORTS_PER_CHECK: Dict[str, int] = {"linearized_bl": 2}


def family_size(entries: Sequence[dict]) -> int:
    """Number of verdicts a manifest produces, the Bonferroni family."""
    return sum(REPORTS_PER_CHECK.get(e["check"], 1) for e in entries)


def run_suite(
    manifest: Sequence[dict],
    context: SuiteContext,
    seed: int = 0,
    jobs: Optional[int] = None,
    level: float = config.DEFAULT_LEVEL,
    sigmas: float = config.DEFAULT_SIGMAS,
) -> List[SlackReport]:
    """Evaluate every manifest entry; reports keep manifest order."""
    entries = [dict(e) for e in manifest]
    for i, entry in enumerate(entries):
        if entry.get("check") not in CHECKS:
            raise ValidationError(
                f"unknown check {entry.get('check')!r}; expected one of {sorted(CHECKS)}",
                f"manifest[{i}].check",
                "UNKNOWN_CHECK",
            )
    margin = bonferroni_sigmas(level, family_size(entries), sigmas)

    def task(i: int) -> List[SlackReport]:
        entry = entries[i]
        reports = CHECKS[entry["check"]](entry, context, margin, child_seed(seed, "suite", i))
        label = entry.get("name")
        for report in reports:
            if label:
                report.metadata["label"] = label
            report.metadata["manifest_index"] = i
            report.metadata["sigmas"] = margin
            logger.info("check_verdict", check=report.name, verdict=report.verdict, slack=report.slack)
        return reports

    results = run_tasks(task, len(entries), jobs)
    reports = [r for part in results for r in part]
    logger.info(
        "suite_done",
        checks=len(entries),
        reports=len(reports),
        violated=sum(r.verdict == VIOLATED for r in reports),
        sigmas=margin,
    )
    return reports


def any_violated(reports: Sequence[SlackReport]) -> bool:
    return any(r.verdict == VIOLATED for r in reports)
