import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from .config import worker_count

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


async def _gather_in_pool(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """
    Runs fn over items in a process pool and gathers the results in submission order.
    """
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        tasks = [loop.run_in_executor(pool, fn, item) for item in items]
        return await asyncio.gather(*tasks)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Maps fn over items, fanning out to worker processes when more than one worker is
    available. fn must be a module-level function. The result list is always in the
    order of items.
    """
    items = list(items)
    workers = min(workers or worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Fanning out {len(items)} tasks to {workers} worker processes")
    return asyncio.run(_gather_in_pool(fn, items, workers))
