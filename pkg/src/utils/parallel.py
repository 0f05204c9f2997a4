"""Order-preserving thread pool map."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> list[R]:
    """
    Apply ``fn`` to every item, returning results in input order.

    Runs inline when one worker is requested or there is at most one item, so
    single-threaded runs have no executor overhead.
    """
    items = list(items)
    workers = max(1, min(max_workers, len(items)))
    if workers == 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
