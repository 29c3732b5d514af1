import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

THREADS_ENV = "FFLAB_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(explicit: Optional[int] = None, configured: Optional[int] = None) -> int:
    """Thread count by precedence: explicit flag, FFLAB_THREADS, config file, 1."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    if configured is not None:
        return max(1, int(configured))
    return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1,
                progress_callback: Optional[Callable[[int, int], None]] = None) -> List[R]:
    """Apply fn to every item and return the results in input order.

    Each item is evaluated independently, so the output does not depend on the
    thread count. progress_callback(done, total) is called from the calling thread.
    """
    items = list(items)
    total = len(items)
    if threads <= 1 or total <= 1:
        results = []
        for i, item in enumerate(items):
            results.append(fn(item))
            if progress_callback:
                progress_callback(i + 1, total)
        return results

    with ThreadPoolExecutor(max_workers=min(threads, total)) as pool:
        futures = [pool.submit(fn, item) for item in items]
        results = []
        for i, future in enumerate(futures):
            results.append(future.result())
            if progress_callback:
                progress_callback(i + 1, total)
    return results
