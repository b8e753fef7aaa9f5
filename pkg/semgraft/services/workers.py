"""
Ordered fan-out over worker processes.

Results always come back in input order, whatever order the workers finish in.
"""

import logging
import multiprocessing
from typing import Callable, Iterable, Iterator, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

CHUNKSIZE = 16


def map_ordered(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> Iterator[R]:
    """
    Apply `func` to every item. jobs <= 1 runs in-process; otherwise a
    multiprocessing pool of `jobs` workers is used (func must be picklable).
    """
    if jobs <= 1:
        for item in items:
            yield func(item)
        return
    batch: List[T] = list(items)
    if not batch:
        return
    logger.debug("[WORKERS] mapping %d items over %d processes", len(batch), jobs)
    with multiprocessing.Pool(processes=jobs) as pool:
        for result in pool.imap(func, batch, chunksize=CHUNKSIZE):
            yield result
