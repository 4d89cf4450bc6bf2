"""Reproducible random streams.

Every Monte Carlo routine splits its sample count into fixed-size chunks; chunk
``i`` draws from its own Philox stream keyed by ``(seed, i)``. Chunks are
independent of the thread count and are concatenated in index order, so output
depends only on ``(seed, count)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16
GENERATOR = "philox4x64 streams keyed by (seed, chunk); ziggurat normals"
_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def default_threads() -> int:
    return os.cpu_count() or 1


def chunk_sizes(count: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(count), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, count: int, seed: int, threads: int | None = None, chunk: int = CHUNK) -> list:
    """Evaluate ``fn(rng, size)`` on every chunk; results in chunk order."""
    sizes = chunk_sizes(count, chunk)
    threads = threads or default_threads()
    jobs = [(i, s) for i, s in enumerate(sizes)]
    if threads == 1 or len(jobs) == 1:
        return [fn(stream(seed, i), s) for i, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(stream(seed, job[0]), job[1]), jobs))
