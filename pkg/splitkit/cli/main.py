"""Command-line entry point: decompose, simulate, verify.

Results go to stdout and to JSON/CSV files under ``--out``; logs and
error objects go to stderr. Exit codes: 0 ok, 1 some inequality violated,
2 invalid input, 3 failed precondition, 4 unsupported, 5 budget exceeded,
70 internal error.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from .. import config
from ..core.error_handler import EXIT_OK, EXIT_VIOLATION, PreconditionError, handle_errors
from ..core.logger import get_logger
from ..core.stats import MomentAccumulator
from ..dynamics.collision import export_trajectories_csv, poisson_jump_fractions, simulate, states_at
from ..dynamics.moments import moment_evolution
from ..inequalities.suite import any_violated, run_suite
from ..subspaces.distribution import mean_projector
from .scene import load
from .schemas import load_manifest

logger = get_logger(__name__)

DEFAULT_OUT = "splitkit-out"
DEFAULT_QUERY_POINTS = 5


def _clean(obj: Any) -> Any:
    """JSON-ready copy: numpy to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    return obj


def write_json(path: Path, payload: Any) -> Path:
    """Deterministic UTF-8 JSON (sorted keys, fixed indentation)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(payload), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


@handle_errors
def cmd_decompose(args) -> int:
    scene = load(args.scene, args.seed, args.tol)
    scene.xi.require_discrete("decompose")
    decomposition = scene.decomposition
    frame = mean_projector(scene.xi)
    print(f"{decomposition.summary()}, lambda={frame.lam:.6g}")
    for i, S in enumerate(decomposition.independent):
        print(f"  E_{i + 1} (dim {S.dim}): {np.round(S.canonical_basis, 6).T.tolist()}")
    out = write_json(
        Path(args.out) / "decomposition.json",
        {
            "decomposition": decomposition.to_dict(),
            "n_independent": len(decomposition.independent),
            "independent_dims": [S.dim for S in decomposition.independent],
            "dependent_dim": decomposition.dependent.dim,
            "lambda": frame.lam,
            "Q": frame.Q,
            "top_eigenvector": frame.top_eigenvector,
            "tol": scene.tol,
        },
    )
    logger.info("decompose_written", path=str(out))
    return EXIT_OK


def _query_times(t_end: float, times: Optional[List[float]]) -> List[float]:
    if times:
        return sorted(float(t) for t in times if t <= t_end)
    return [float(t) for t in np.linspace(0.0, t_end, DEFAULT_QUERY_POINTS)]


@handle_errors
def cmd_simulate(args) -> int:
    scene = load(args.scene, args.seed, args.tol)
    collision = scene.collision_scene()
    dyn = scene.schema.dynamics
    t_end = float(args.t_end if args.t_end is not None else dyn.t_end)
    n_paths = int(args.paths if args.paths is not None else dyn.n_paths)
    paths = simulate(collision, t_end, n_paths, seed=scene.seed, jobs=args.jobs)
    out_dir = Path(args.out)
    csv_path = export_trajectories_csv(paths, out_dir / "trajectories.csv")

    times = _query_times(t_end, dyn.times)
    empirical = []
    for t in times:
        acc = MomentAccumulator(scene.dim).update(states_at(paths, t))
        jumps = poisson_jump_fractions(paths, t)
        empirical.append(
            {
                "t": t,
                "mean": acc.mean,
                "mean_se": acc.mean_se(),
                "cov": acc.covariance(),
                "jump_fractions": {k: v.to_dict() for k, v in jumps.items()},
            }
        )
    payload = {"n_paths": n_paths, "t_end": t_end, "seed": scene.seed, "empirical": empirical}
    try:
        payload["predicted"] = moment_evolution(collision, times).to_dict()
    except PreconditionError as exc:
        payload["predicted"] = None
        logger.info("moments_not_predicted", reason=exc.message)
    moments_path = write_json(out_dir / "moments.json", payload)
    print(f"{n_paths} paths to t={t_end:g}: {csv_path}, {moments_path}")
    return EXIT_OK


@handle_errors
def cmd_verify(args) -> int:
    scene = load(args.scene, args.seed, args.tol)
    if args.manifest is not None:
        manifest = load_manifest(args.manifest)
    elif scene.schema.suite:
        manifest = [c.model_dump(exclude_none=True) for c in scene.schema.suite]
    else:
        raise PreconditionError("no manifest given and the scene has no suite")
    tol = scene.schema.tolerances
    reports = run_suite(manifest, scene.suite_context(), seed=scene.seed, jobs=args.jobs, level=tol.level, sigmas=tol.sigmas)
    for r in reports:
        mark = " (tight)" if r.tight else ""
        print(f"{r.name}: {r.verdict}{mark}  lhs={r.lhs:.6g} rhs={r.rhs:.6g} slack={r.slack:.3g}")
    violated = any_violated(reports)
    write_json(
        Path(args.out) / "report.json",
        {"seed": scene.seed, "violated": violated, "reports": [r.to_dict() for r in reports]},
    )
    return EXIT_VIOLATION if violated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitkit", description="Subspace splitting and collision dynamics toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", required=True, help="scene JSON file")
    common.add_argument("--seed", type=int, default=None, help="overrides the scene seed")
    common.add_argument("--out", default=DEFAULT_OUT, help="output directory")
    common.add_argument("--tol", type=float, default=None, help="rank tolerance (overrides the scene)")
    common.add_argument("--jobs", type=int, default=None, help=f"worker threads (default SPLITKIT_JOBS={config.JOBS})")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("decompose", parents=[common], help="independent/dependent decomposition")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", parents=[common], help="simulate the collision process")
    p.add_argument("--paths", type=int, default=None, help="number of paths")
    p.add_argument("--t-end", dest="t_end", type=float, default=None, help="time horizon")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run an inequality manifest")
    p.add_argument("--manifest", default=None, help="manifest JSON (defaults to the scene suite)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
