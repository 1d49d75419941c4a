"""
Parallel Execution with Ordered Merge
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Sequence, Tuple, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply fn to every item on a thread pool; results come back in input order.

    The first failure is re-raised after all submitted work has finished.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]

    def exec_one(item: T, idx: int) -> Tuple[int, R]:
        return idx, fn(item)

    results: dict = {}
    errors: List[Tuple[int, BaseException]] = []
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        futs = {pool.submit(exec_one, it, i): i for i, it in enumerate(items)}
        for fut in as_completed(futs):
            try:
                idx, res = fut.result()
                results[idx] = res
            except Exception as e:
                errors.append((futs[fut], e))
    if errors:
        idx, err = min(errors, key=lambda x: x[0])
        logger.debug("parallel task %d failed: %s", idx, err)
        raise err
    return [results[i] for i in range(len(items))]
