"""Deterministic chunked execution for the estimators.

Work is split into fixed index ranges and partial results are combined in
range order, never completion order.  Together with the index-addressed
random streams this makes every estimator's output independent of the worker
count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

CHUNK = 4096


def run_chunked(fn: Callable[[int, int], T], total: int, workers: int = 1,
                chunk: int = CHUNK) -> list[T]:
    """Apply ``fn(start, count)`` over [0, total) in fixed chunks."""
    spans = [(lo, min(chunk, total - lo)) for lo in range(0, total, chunk)]
    if workers <= 1 or len(spans) <= 1:
        return [fn(lo, n) for lo, n in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, n) for lo, n in spans]
        return [f.result() for f in futures]
