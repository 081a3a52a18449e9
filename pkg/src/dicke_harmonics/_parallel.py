"""Ordered thread-pool map over independent work items."""

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "DICKE_HARMONICS_THREADS"


def resolve_threads(threads=None) -> int:
    """Explicit value, else ``$DICKE_HARMONICS_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return threads


def chunked_map(fn, n_items, threads=None, min_chunk=8):
    """Apply ``fn(start, stop)`` over contiguous slices of ``range(n_items)``.

    Results come back in slice order, so any per-item computation that does
    not depend on its neighbours gives the same output for every thread count.
    """
    threads = resolve_threads(threads)
    n_chunks = max(1, min(threads, n_items // min_chunk))
    bounds = [(i * n_items // n_chunks, (i + 1) * n_items // n_chunks) for i in range(n_chunks)]
    if n_chunks == 1:
        return [fn(*bounds[0])]
    with ThreadPoolExecutor(max_workers=n_chunks) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
