"""Worker-pool helpers.

Sweeps over channels, SNR points and trials are independent, so they are
fanned out to a thread pool. Results always come back in input order so
that aggregation does not depend on the number of workers.
"""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply a function to every item, possibly in parallel.

    Args:
        fn: The function to apply.
        items: Inputs, consumed once.
        threads: Worker count. 1 or less runs inline on the caller's thread.

    Returns:
        Results in the same order as items.

    Raises:
        Exception: The first failure (in input order) is logged and re-raised.
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [_call(fn, item) for item in work]

    with ThreadPoolExecutor(max_workers=min(threads, len(work))) as pool:
        futures = [pool.submit(_call, fn, item) for item in work]
        return [future.result() for future in futures]


def _call(fn: Callable[[T], R], item: T) -> R:
    """Run one work item, logging failures before propagating them."""
    try:
        return fn(item)
    except Exception as e:
        logger.exception("Worker task failed: %s", e)
        raise
