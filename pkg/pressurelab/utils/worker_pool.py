# pressurelab/utils/worker_pool.py

"""
Ordered dispatch of independent schedule points.

Results come back in submission order whatever the completion order, so the
rows a task produces do not depend on the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


def map_ordered(fn, items, threads=1):
    """
    Apply fn to every item, in a thread pool when threads > 1.

    Args:
        fn: Callable taking one item.
        items: Iterable of work items.
        threads: Pool size.

    Returns:
        List of results in the order of items.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f"dispatching {len(items)} work items to {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
