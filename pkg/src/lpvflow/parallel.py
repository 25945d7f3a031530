"""Worker-count control for the embarrassingly parallel search loops.

Grid solves and multistarts are independent; LPVFLOW_THREADS caps how many
run concurrently (default 1, i.e. sequential). Results are merged by the
callers with order-independent rules, so the worker count never changes the
numbers produced.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("LPVFLOW_THREADS", "")
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        return 1
    return max(1, k)


def map_starts(fn, items: list) -> list:
    """Order-preserving map over independent work items, threaded if allowed."""
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
