"""Order-preserving map with an optional worker cap from ``SAR_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(default=1):
    raw = os.environ.get("SAR_THREADS", "").strip()
    if not raw:
        return default
    try:
        v = int(raw)
    except ValueError:
        raise ValueError(f"SAR_THREADS must be a positive integer, got {raw!r}")
    if v < 1:
        raise ValueError(f"SAR_THREADS must be a positive integer, got {raw!r}")
    return v


def pmap(fn, items, workers=None):
    """``list(map(fn, items))``, threaded when more than one worker is allowed.

    Results keep input order, so output never depends on the worker count.
    """
    workers = worker_count() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
