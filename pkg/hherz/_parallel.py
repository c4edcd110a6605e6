"""
Bounded, order-preserving parallel map.

The worker count is capped by the `HHERZ_THREADS` environment variable
(unset or `0` means one worker per CPU). Calls made from inside a worker run
serially so nested maps never multiply the thread count.
"""
import logging
import os
import threading
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

__all__ = "THREADS_ENV", "max_workers", "parallel_map"

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HHERZ_THREADS"

logger = logging.getLogger(__name__)
_local = threading.local()

def max_workers() -> int:
    """
    Number of workers allowed by `HHERZ_THREADS`.
    """
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        requested = int(raw)
    except ValueError:
        logger.warning("ignoring malformed %s=%r", THREADS_ENV, raw)
        requested = 0

    if requested <= 0:
        return os.cpu_count() or 1

    return requested

def _run_in_worker(fn: Callable[[T], R], item: T) -> R:
    _local.in_worker = True
    try:
        return fn(item)
    finally:
        _local.in_worker = False

def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """
    Apply `fn` to every item, possibly concurrently. Results keep input order.
    """
    items = list(items)
    workers = min(max_workers(), len(items))

    if workers <= 1 or getattr(_local, "in_worker", False):
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_run_in_worker, [fn] * len(items), items))
