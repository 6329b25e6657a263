"""Process-pool helper with deterministic, index-ordered reduction."""

from __future__ import annotations

import os
from multiprocessing import get_context

ENV_WORKERS = "HDCAUSAL_WORKERS"


def effective_workers(requested: int | None = None) -> int:
    """Resolve a worker count: explicit flag, else env override, else all cores."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value > 0:
            return value
    return os.cpu_count() or 1


def _init_worker(numba_threads: int) -> None:
    try:
        import numba

        numba.set_num_threads(numba_threads)
    except Exception:
        pass


def map_indexed(fn, count: int, workers: int) -> list:
    """``[fn(i) for i in range(count)]``, optionally across processes.

    Results always come back ordered by index, so any reduction over them
    is independent of scheduling. Forked workers share the parent's JIT
    cache (the kernels pin the fork-safe workqueue threading layer); each
    worker gets a proportional share of the numba threads.
    """
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    workers = min(workers, count)
    per_worker = max(1, (os.cpu_count() or 1) // workers)
    try:
        ctx = get_context("fork")
    except ValueError:  # pragma: no cover - non-POSIX fallback
        ctx = get_context("spawn")
    with ctx.Pool(
        processes=workers, initializer=_init_worker, initargs=(per_worker,)
    ) as pool:
        return pool.map(fn, range(count), chunksize=max(1, count // (workers * 4)))
