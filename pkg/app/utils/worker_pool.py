import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from app.dependencies import get_settings
from app.utils.seeding import spawn_generators

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(func: Callable[[T], R], tasks: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply `func` to every task and return the results in task order.

    numpy releases the GIL inside its dense kernels, so a thread pool is enough
    to keep several cores busy. With one worker the tasks run inline.
    """
    tasks = list(tasks)
    if workers is None:
        workers = get_settings().workers
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug(f"Dispatching {len(tasks)} tasks to {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def _chunk_sizes(total: int, chunk_size: int) -> List[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunked(func: Callable[[int, np.random.Generator], R], total: int, rng: np.random.Generator,
                chunk_size: Optional[int] = None, workers: Optional[int] = None) -> List[R]:
    """
    Split `total` samples into chunks and call func(size, generator) once per chunk.

    Chunk i always gets substream i, so the concatenated samples do not depend on `workers`.
    """
    chunk_size = get_settings().chunk_size if chunk_size is None else chunk_size
    sizes = _chunk_sizes(total, chunk_size)
    generators = spawn_generators(rng, len(sizes))
    return run_ordered(lambda task: func(*task), list(zip(sizes, generators)), workers)
