"""Seed substreams for reproducible parallel Monte Carlo

A run has a single integer seed. Each unit of work derives its own
generator from (seed, module, task_index), so results do not depend on
scheduling or on how many workers execute the tasks.
"""

import hashlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator, None]

_SEED_MASK = (1 << 64) - 1


def _digest(seed: int, module: str, task_index: int) -> int:
    payload = f"{int(seed) & _SEED_MASK}|{module}|{int(task_index)}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=16).digest(), "little")


def substream(seed: int, module: str, task_index: int = 0) -> np.random.Generator:
    """Independent generator for one (module, task) pair of a seeded run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_digest(seed, module, task_index))))


def child_seed(seed: int, module: str, task_index: int = 0) -> int:
    """A derived 63-bit integer seed, for libraries that take an int."""
    return _digest(seed, module, task_index) & ((1 << 63) - 1)


def as_generator(seed: SeedLike, module: str = "default") -> np.random.Generator:
    """Accept an int seed or a ready generator. ``None`` means seed 0."""
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(0 if seed is None else int(seed), module, 0)


def seed_from_generator(rng: np.random.Generator) -> int:
    """Draw an integer seed from a generator (used to fan out sub-tasks)."""
    return int(rng.integers(0, 2**63 - 1))
