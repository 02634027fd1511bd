"""Order-preserving map over sample indices and the reductions applied to it."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

THREADS_ENV = "QNET_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def _run_chunk(fn: Callable, indices: Sequence[int]) -> list:
    return [fn(i) for i in indices]


def ordered_map(fn: Callable[[int], object], n: int, threads: Optional[int] = None) -> list:
    """``[fn(0), ..., fn(n-1)]`` with ``fn`` evaluated across ``threads`` processes.

    ``fn`` must be picklable (a module-level function or a ``functools.partial``).
    Results come back in index order, so any reduction over them is independent
    of the worker count.
    """
    threads = resolve_threads(threads)
    if threads == 1 or n < 2:
        return _run_chunk(fn, range(n))
    chunks = [range(start, n, threads) for start in range(threads)]
    out: list = [None] * n
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for chunk, values in zip(chunks, pool.map(_run_chunk, [fn] * len(chunks), chunks)):
            for i, v in zip(chunk, values):
                out[i] = v
    return out


def mean_std(values) -> tuple:
    """Mean and ``ddof=1`` standard deviation, computed about the first value.

    Shifting first makes a constant sample give its value and a zero spread
    exactly.
    """
    v = np.asarray(values, dtype=float)
    ref = v[0]
    d = v - ref
    std = float(np.std(d, ddof=1)) if v.size > 1 else 0.0
    return float(ref + np.mean(d)), std
