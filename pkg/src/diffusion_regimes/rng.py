"""Deterministic stream derivation and fixed-order parallel task execution.

Every stochastic routine in the package receives either an explicit
``numpy.random.Generator`` or an :class:`RngPolicy` from which it derives
independent streams keyed by a purpose tag and a task index.  Streams with
the same (seed, tag, index) are bit-identical across runs and across any
degree of parallelism; distinct keys give statistically independent streams.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


def _tag_key(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")


@dataclass(frozen=True)
class RngPolicy:
    """Splittable counter-style RNG derivation from a single master seed."""

    master_seed: int

    def stream(self, tag: str, index: int = 0) -> np.random.Generator:
        """Independent generator for the given (tag, index) pair."""
        if index < 0:
            raise ValueError("stream index must be non-negative")
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(_tag_key(tag), index))
        return np.random.default_rng(ss)


def run_tasks(fn: Callable[[int], object], n_tasks: int, workers: int = 1) -> list:
    """Evaluate fn(0..n_tasks-1), possibly on a thread pool, in index order.

    The partition into tasks is fixed by the caller, so results do not depend
    on ``workers``; the pool only overlaps execution (numpy releases the GIL
    in its kernels, which is where the time goes).
    """
    if workers <= 1 or n_tasks <= 1:
        return [fn(i) for i in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_tasks)))


def chunk_indices(total: int, chunk: int) -> Sequence[tuple[int, int]]:
    """Fixed [start, stop) partition of ``total`` items into chunks."""
    if chunk <= 0:
        raise ValueError("chunk size must be positive")
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
