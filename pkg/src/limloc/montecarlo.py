"""Chunked, optionally threaded Monte Carlo loops.

Work is cut into fixed-size chunks and chunk ``c`` draws from sub-stream
``c`` of the seed.  Results are gathered in chunk order, so they do not
depend on the number of threads.  The compiled kernels release the GIL,
which is what makes threads worthwhile here.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ParameterError
from .rng import as_seed

THREADS_ENV = "LIMLOC_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ParameterError(f"{THREADS_ENV} must be >= 1")
    return n


def _map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: fn(*j), jobs))


def run_chunks(seed, total: int, chunk: int, fn, threads: int | None = None, offset: int = 0):
    """``fn(rng, size)`` over ``ceil(total / chunk)`` chunks; returns the list of results."""
    seed = as_seed(seed)
    threads = default_threads() if threads is None else threads
    jobs = [(seed.generator(offset + c), min(chunk, total - lo)) for c, lo in enumerate(range(0, total, chunk))]
    return _map(fn, jobs, threads)


def run_until(seed, chunk: int, fn, done, max_chunks: int, threads: int | None = None):
    """Run chunks in waves until ``done(results_so_far)`` or ``max_chunks`` is reached.

    A wave holds ``threads`` chunks; the result list is always a prefix of the
    chunk sequence, so the outcome is the same for any thread count as long as
    ``done`` only looks at the prefix it is given and the caller trims to the
    first chunk that satisfied it.
    """
    seed = as_seed(seed)
    threads = default_threads() if threads is None else threads
    results = []
    while len(results) < max_chunks:
        lo = len(results)
        hi = min(max_chunks, lo + max(1, threads))
        results.extend(_map(fn, [(seed.generator(c), chunk) for c in range(lo, hi)], threads))
        for i in range(lo, len(results)):
            if done(results[: i + 1]):
                return results[: i + 1]
    return results
