"""
Ordered parallel map over independent experiment cells
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from loguru import logger

from config import Config

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None
) -> List[R]:
    """
    Apply func to every item, possibly in worker processes

    Results come back in input order regardless of completion order.
    func must be a module-level callable (or a functools.partial of one).

    Args:
        func: Function applied to each item
        items: Independent work items
        workers: Process count; defaults to Config.MAX_WORKERS

    Returns:
        List of results aligned with items
    """
    items = list(items)
    workers = Config.MAX_WORKERS if workers is None else int(workers)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(workers, len(items))
    logger.debug(f"Dispatching {len(items)} cells to {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
