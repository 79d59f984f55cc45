"""Worker-thread plumbing for row-parallel kernels.

Work is always split into the same fixed-size row blocks regardless of
the worker count, and each block writes a disjoint slice of a
preallocated output, so results are bit-identical for any
POISSONPROP_THREADS setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_BLOCK_ROWS = 64


def worker_count() -> int:
    """Worker cap from POISSONPROP_THREADS; default is 1 (sequential)."""
    raw = os.environ.get("POISSONPROP_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"POISSONPROP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"POISSONPROP_THREADS must be >= 1, got {n}")
    return n


def row_blocks(n_rows: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _BLOCK_ROWS, n_rows)) for lo in range(0, n_rows, _BLOCK_ROWS)]


def run_blocked(fn, n_rows: int, threads: int | None = None) -> None:
    """Call ``fn(lo, hi)`` for every row block, possibly on worker threads.

    ``fn`` must only write rows [lo, hi) of its output arrays.
    """
    if threads is None:
        threads = worker_count()
    blocks = row_blocks(n_rows)
    if threads <= 1 or len(blocks) <= 1:
        for lo, hi in blocks:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in blocks]
        for fut in futures:
            fut.result()
