"""The collision process: one particle against an iid bath.

At the jumps of a Poisson clock the particle velocity v meets a fresh bath
velocity v_* and a fresh subspace E ~ xi, and becomes P_E v + P_{E^perp} v_*.
Paths are simulated in fixed-size chunks, each with its own seed substream.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .. import config
from ..core.error_handler import DimensionMismatchError
from ..core.logger import get_logger
from ..core.parallel import chunk_sizes, run_tasks
from ..core.rng import substream
from ..core.stats import MomentAccumulator, MonteCarloEstimate, mean_with_se
from ..core.validators import ArrayValidator
from ..measures.spec import MeasureSpec
from ..subspaces.distribution import SubspaceDistribution
from ..subspaces.subspace import Subspace

logger = get_logger(__name__)

CONTINUOUS_ATOM = -1


@dataclass(frozen=True)
class CollisionScene:
    xi: SubspaceDistribution
    bath: MeasureSpec
    initial: MeasureSpec
    rate: float = 1.0

    def __post_init__(self):
        n = self.xi.ambient_dim
        if self.bath.dim != n:
            raise DimensionMismatchError(n, self.bath.dim, "bath")
        if self.initial.dim != n:
            raise DimensionMismatchError(n, self.initial.dim, "initial")
        ArrayValidator.positive(self.rate, "rate")

    @property
    def dim(self) -> int:
        return self.xi.ambient_dim


@dataclass(frozen=True)
class Trajectory:
    """Jump skeleton: states[i] holds from times[i] until the next jump.

    times[0] = 0 and states[0] is the initial velocity; collision_subspaces[i]
    is the atom index used at jump i + 1 (-1 for a sampled subspace).
    """

    times: np.ndarray
    states: np.ndarray
    collision_subspaces: np.ndarray

    @property
    def n_jumps(self) -> int:
        return len(self.times) - 1

    def state_at(self, t: float) -> np.ndarray:
        return self.states[np.searchsorted(self.times, t, side="right") - 1]


@dataclass
class ChunkResult:
    """Flat arrays for one chunk of paths, jumps ordered by (path, time)."""

    initial: np.ndarray
    counts: np.ndarray
    offsets: np.ndarray
    jump_times: np.ndarray
    jump_states: np.ndarray
    jump_atoms: np.ndarray
    final: np.ndarray

    def states_at(self, t: float) -> np.ndarray:
        """Velocity of every path of the chunk at time t."""
        path_of = np.repeat(np.arange(len(self.counts)), self.counts)
        done = np.bincount(path_of[self.jump_times <= t], minlength=len(self.counts))
        out = self.initial.copy()
        moved = done > 0
        out[moved] = self.jump_states[self.offsets[moved] + done[moved] - 1]
        return out

    def trajectories(self) -> List[Trajectory]:
        result = []
        for p, (start, k) in enumerate(zip(self.offsets, self.counts)):
            sl = slice(start, start + k)
            result.append(
                Trajectory(
                    times=np.concatenate([[0.0], self.jump_times[sl]]),
                    states=np.vstack([self.initial[p][None, :], self.jump_states[sl]]),
                    collision_subspaces=self.jump_atoms[sl].copy(),
                )
            )
        return result


def collide(v, v_star, E: Subspace) -> Tuple[np.ndarray, np.ndarray]:
    """(P_E v + P_{E^perp} v_*, P_E v_* + P_{E^perp} v); works row-wise too."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    if v.shape != v_star.shape:
        raise DimensionMismatchError(v.shape[-1], v_star.shape[-1], "v_star")
    if v.shape[-1] != E.ambient_dim:
        raise DimensionMismatchError(E.ambient_dim, v.shape[-1], "v")
    pv, pv_star = E.project(v), E.project(v_star)
    return pv + (v_star - pv_star), pv_star + (v - pv)


def exchanged_energy_fraction(v, v_star, E: Subspace) -> np.ndarray:
    """Share of the pair's kinetic energy carried across by the collision."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    v_star = np.atleast_2d(np.asarray(v_star, dtype=float))
    moved = np.sum(E.project_complement(v) ** 2, axis=1) + np.sum(
        E.project_complement(v_star) ** 2, axis=1
    )
    total = np.sum(v**2, axis=1) + np.sum(v_star**2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, moved / total, 0.0)


def _apply_jumps(
    xi: SubspaceDistribution,
    current: np.ndarray,
    rows: np.ndarray,
    atoms: np.ndarray,
    partners: np.ndarray,
    rng: np.random.Generator,
) -> None:
    """In place: current[rows] <- P_E current[rows] + P_{E^perp} partners."""
    if xi.continuous:
        for r, S, w in zip(rows, xi.sample_subspaces(rng, len(rows)), partners):
            current[r] = S.project(current[r]) + S.project_complement(w)
        return
    for a, S in enumerate(xi.atoms):
        mask = atoms == a
        if np.any(mask):
            sel = rows[mask]
            current[sel] = S.project(current[sel]) + S.project_complement(partners[mask])


def _run_chunk(
    scene: CollisionScene,
    t_end: float,
    count: int,
    rng: np.random.Generator,
    start: Optional[np.ndarray] = None,
    record: bool = True,
) -> ChunkResult:
    """Simulate ``count`` paths to ``t_end``; draws happen in a fixed order."""
    n = scene.dim
    initial = scene.initial.draw(rng, count) if start is None else np.array(start, dtype=float)
    counts = rng.poisson(scene.rate * t_end, size=count)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    total = int(counts.sum())

    path_of = np.repeat(np.arange(count), counts)
    raw_times = rng.uniform(0.0, t_end, size=total)
    order = np.lexsort((raw_times, path_of))
    jump_times = raw_times[order]
    if scene.xi.continuous:
        jump_atoms = np.full(total, CONTINUOUS_ATOM, dtype=np.int64)
    else:
        jump_atoms = scene.xi.sample_atoms(rng, total).astype(np.int64)
    partners = scene.bath.draw(rng, total) if total else np.zeros((0, n))

    current = initial.copy()
    jump_states = np.empty((total, n)) if record else np.zeros((0, n))
    max_jumps = int(counts.max()) if count else 0
    for j in range(max_jumps):
        rows = np.flatnonzero(counts > j)
        pos = offsets[rows] + j
        _apply_jumps(scene.xi, current, rows, jump_atoms[pos], partners[pos], rng)
        if record:
            jump_states[pos] = current[rows]
    return ChunkResult(initial, counts, offsets, jump_times, jump_states, jump_atoms, current)


def _chunked(
    scene: CollisionScene,
    t_end: float,
    n_paths: int,
    seed: int,
    jobs: Optional[int],
    chunk: Optional[int],
    module: str,
    reduce,
):
    sizes = chunk_sizes(n_paths, chunk)

    def task(c: int):
        return reduce(_run_chunk(scene, t_end, sizes[c], substream(seed, module, c)))

    return run_tasks(task, len(sizes), jobs)


def simulate(
    scene: CollisionScene,
    t_end: float,
    n_paths: int,
    seed: int = 0,
    jobs: Optional[int] = None,
    chunk: Optional[int] = None,
) -> List[Trajectory]:
    """``n_paths`` independent jump skeletons on [0, t_end]."""
    ArrayValidator.positive(t_end, "t_end")
    n_paths = ArrayValidator.count(n_paths, "n_paths")
    parts = _chunked(scene, t_end, n_paths, seed, jobs, chunk, "simulate", lambda r: r.trajectories())
    paths = [traj for part in parts for traj in part]
    logger.info(
        "simulate_done",
        n_paths=n_paths,
        t_end=t_end,
        jumps=int(sum(t.n_jumps for t in paths)),
        chunks=len(parts),
    )
    return paths


def propagate(scene: CollisionScene, v0, t: float, seed: int = 0, module: str = "propagate") -> np.ndarray:
    """Velocities at time t of independent paths started at the rows of v0."""
    v0 = ArrayValidator.samples(v0, scene.dim, field="v0")
    if t <= 0:
        return v0.copy()
    sizes = chunk_sizes(v0.shape[0])
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    finals = [
        _run_chunk(scene, t, size, substream(seed, module, c), v0[bounds[c] : bounds[c + 1]], record=False).final
        for c, size in enumerate(sizes)
    ]
    return np.vstack(finals)


def states_at(trajectories: Sequence[Trajectory], t: float) -> np.ndarray:
    """V_t for every trajectory (values are constant between jumps)."""
    return np.vstack([traj.state_at(t) for traj in trajectories])


def poisson_jump_fractions(trajectories: Sequence[Trajectory], t: float) -> dict:
    """Fractions of paths with 0, 1 and >= 2 jumps by time t."""
    jumps = np.array([np.searchsorted(traj.times, t, side="right") - 1 for traj in trajectories])
    return {
        "p0": mean_with_se(jumps == 0),
        "p1": mean_with_se(jumps == 1),
        "p2plus": mean_with_se(jumps >= 2),
    }


def empirical_moments(
    scene: CollisionScene,
    t_end: float,
    times: Iterable[float],
    n_paths: int,
    seed: int = 0,
    jobs: Optional[int] = None,
    chunk: Optional[int] = None,
) -> dict:
    """Mean and covariance of V_t at the query times, streamed chunk by chunk.

    Uses the same substreams as ``simulate``, so the numbers describe the
    paths ``simulate`` returns for the same arguments.
    """
    times = [float(t) for t in times]
    n = scene.dim

    def reduce(result: ChunkResult):
        return [MomentAccumulator(n).update(result.states_at(t)) for t in times]

    parts = _chunked(scene, t_end, n_paths, seed, jobs, chunk, "simulate", reduce)
    merged = [MomentAccumulator(n) for _ in times]
    for part in parts:
        for acc, piece in zip(merged, part):
            acc.merge(piece)
    return {
        "times": times,
        "n_paths": n_paths,
        "mean": [acc.mean.tolist() for acc in merged],
        "mean_se": [acc.mean_se().tolist() for acc in merged],
        "cov": [acc.covariance().tolist() for acc in merged],
    }


def mean_exchanged_fraction(
    xi: SubspaceDistribution, particle: MeasureSpec, bath: MeasureSpec, n_collisions: int, seed: int = 0
) -> MonteCarloEstimate:
    """Average exchanged energy fraction over collisions with E ~ xi."""
    rng = substream(seed, "exchanged_energy", 0)
    v = particle.draw(rng, n_collisions)
    v_star = bath.draw(rng, n_collisions)
    atoms = xi.sample_atoms(rng, n_collisions)
    fractions = np.empty(n_collisions)
    for a, S in enumerate(xi.atoms):
        mask = atoms == a
        if np.any(mask):
            fractions[mask] = exchanged_energy_fraction(v[mask], v_star[mask], S)
    return mean_with_se(fractions)


CSV_ATOM_FOR_START = -1


def export_trajectories_csv(trajectories: Sequence[Trajectory], path: Union[str, Path]) -> Path:
    """RFC-4180 CSV: path_id, jump_index, time, v_1..v_n, atom_index.

    Floats use repr, so identical inputs give byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = trajectories[0].states.shape[1] if trajectories else 0
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["path_id", "jump_index", "time"] + [f"v_{i + 1}" for i in range(n)] + ["atom_index"])
        for pid, traj in enumerate(trajectories):
            for j, (t, state) in enumerate(zip(traj.times, traj.states)):
                atom = CSV_ATOM_FOR_START if j == 0 else int(traj.collision_subspaces[j - 1])
                writer.writerow([pid, j, repr(float(t))] + [repr(float(x)) for x in state] + [atom])
    return path
