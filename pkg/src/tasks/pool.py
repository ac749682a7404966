"""
Ordered worker pool.

Results always come back in submission order so reductions are deterministic
no matter how the threads interleave.

Usage:
    from src.tasks import parallel_map
    values = parallel_map(solve_at_node, nodes, max_workers=4)

    pool = WorkerPool(max_workers=2)
    results = pool.run([("stokes", fn_a), ("twisting", fn_b)])
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from ..config import settings
from ..logger import logger

T = TypeVar("T")
R = TypeVar("R")


class TaskStatus(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class TaskResult:
    """Outcome of one named task."""
    name: str
    status: TaskStatus
    result: Any = None
    error: Optional[BaseException] = None
    duration_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == TaskStatus.COMPLETED


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    max_workers: Optional[int] = None,
) -> List[R]:
    """
    Apply `fn` to every item, possibly on several threads, preserving order.

    Exceptions propagate from the first failing item (in input order).
    """
    items = list(items)
    workers = max_workers if max_workers is not None else settings.max_workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(fn, items))


class WorkerPool:
    """Runs named zero-argument callables and records each outcome."""

    def __init__(self, max_workers: Optional[int] = None):
        self._max_workers = max_workers if max_workers is not None else settings.max_workers

    def _execute(self, task: Tuple[str, Callable[[], Any]]) -> TaskResult:
        name, func = task
        started = time.perf_counter()
        try:
            value = func()
            status, error = TaskStatus.COMPLETED, None
        except Exception as exc:
            value, status, error = None, TaskStatus.FAILED, exc
            logger.error("Task failed: %s: %s: %s", name, type(exc).__name__, exc)
        return TaskResult(
            name=name,
            status=status,
            result=value,
            error=error,
            duration_seconds=round(time.perf_counter() - started, 6),
        )

    def run(self, tasks: Sequence[Tuple[str, Callable[[], Any]]]) -> List[TaskResult]:
        """Execute all tasks; the returned list follows the order of `tasks`."""
        return parallel_map(self._execute, tasks, self._max_workers)
