from __future__ import annotations

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def resolve_workers(workers: int | None) -> int:
    """``None`` or 0 means all available cores."""
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError(f"workers must be >= 0, got {workers}")
    return workers


def run_tasks(fn: Callable[[T], R], tasks: Sequence[T], workers: int | None = 1) -> list[R]:
    """Apply ``fn`` to every task; results come back in task order whatever the completion order.

    ``fn`` must be a module-level callable so worker processes can import it.
    """
    count = min(resolve_workers(workers), len(tasks))
    if count <= 1:
        return [fn(task) for task in tasks]
    logger.debug("Dispatching tasks=%s workers=%s", len(tasks), count)
    chunksize = max(1, len(tasks) // (count * 4))
    with ProcessPoolExecutor(max_workers=count) as executor:
        return list(executor.map(fn, tasks, chunksize=chunksize))
