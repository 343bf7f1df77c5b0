"""Deterministic chunked Monte Carlo driver.

Replicates are split into fixed-size chunks numbered from 0. Chunk k always
draws from the same child stream (``rng.replicate(k)``) and results are
combined in chunk order, so every estimate is a pure function of (seed, n):
the worker count changes wall time, never output bytes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple

from .rng import RngStream

# fixed chunk size: changing it changes every seeded result
CHUNK = 2048

__all__ = ["CHUNK", "plan_chunks", "run_ordered", "map_reduce"]


def plan_chunks(n: int, chunk: int = CHUNK, first_index: int = 0) -> List[Tuple[int, int]]:
    """(chunk_index, count) pairs covering n replicates."""
    if n <= 0:
        raise ValueError("need at least one replicate")
    out = []
    done = 0
    k = first_index
    while done < n:
        c = min(chunk, n - done)
        out.append((k, c))
        done += c
        k += 1
    return out


def run_ordered(
    worker: Callable[[RngStream, int], object],
    plan: Sequence[Tuple[int, int]],
    rng: RngStream,
    workers: int = 1,
) -> list:
    """Run worker(stream_k, count_k) for each planned chunk; results in plan order."""
    if workers <= 1:
        return [worker(rng.replicate(k), c) for k, c in plan]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(worker, rng.replicate(k), c) for k, c in plan]
        return [f.result() for f in futures]


def map_reduce(
    worker: Callable[[RngStream, int], object],
    combine: Callable[[list], object],
    n: int,
    rng: RngStream,
    workers: int = 1,
    chunk: int = CHUNK,
):
    return combine(run_ordered(worker, plan_chunks(n, chunk), rng, workers))
