"""Ordered fan-out of independent tasks over a thread pool"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

from .. import config
from .logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


def resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        return config.JOBS
    return max(1, int(jobs))


def run_tasks(fn: Callable[[int], T], n_tasks: int, jobs: Optional[int] = None) -> List[T]:
    """Evaluate ``fn(0..n_tasks-1)`` and return the results in task order.

    Task boundaries are decided by the caller, never by ``jobs``; the worker
    count only changes wall time.
    """
    jobs = resolve_jobs(jobs)
    if n_tasks <= 0:
        return []
    if jobs == 1 or n_tasks == 1:
        return [fn(i) for i in range(n_tasks)]
    workers = min(jobs, n_tasks)
    logger.debug("run_tasks", n_tasks=n_tasks, workers=workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_tasks)))


def chunk_sizes(total: int, chunk: Optional[int] = None) -> List[int]:
    """Split ``total`` items into fixed-size chunks (last one possibly short)."""
    chunk = chunk or config.SIM_CHUNK
    if total <= 0:
        return []
    full, rest = divmod(int(total), int(chunk))
    return [chunk] * full + ([rest] if rest else [])
