"""Deterministic worker-pool helpers.

The env var VEILKIT_THREADS caps the thread count (default: logical
cores).  Work items must be pure functions of their arguments; pmap
preserves input order, so the thread count never changes output bytes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ValidationError


def thread_count():
    """Worker count from VEILKIT_THREADS, falling back to logical cores."""
    raw = os.environ.get("VEILKIT_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"VEILKIT_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ValidationError(f"VEILKIT_THREADS must be >= 1, got {n}")
    return n


def pmap(fn, items):
    """Map fn over items, result order matching input order."""
    items = list(items)
    n = min(thread_count(), max(len(items), 1))
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
