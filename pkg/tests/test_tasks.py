"""Tests for the ordered worker pool."""

import threading
import time

import pytest

from src.tasks import parallel_map
from src.tasks.pool import TaskStatus, WorkerPool


@pytest.fixture()
def pool():
    """Pool with two worker threads."""
    return WorkerPool(max_workers=2)


class TestParallelMap:
    def test_preserves_order(self):
        def slow_square(x):
            time.sleep(0.01 * (5 - x))
            return x * x

        assert parallel_map(slow_square, range(5), max_workers=4) == [0, 1, 4, 9, 16]

    def test_single_worker_runs_inline(self):
        seen = []
        parallel_map(lambda _: seen.append(threading.current_thread().name), range(3), max_workers=1)
        assert set(seen) == {threading.current_thread().name}

    def test_exception_propagates(self):
        def boom(x):
            if x == 2:
                raise ValueError("bad node")
            return x

        with pytest.raises(ValueError):
            parallel_map(boom, range(4), max_workers=2)

    def test_empty(self):
        assert parallel_map(lambda x: x, [], max_workers=3) == []


class TestWorkerPool:
    def test_run_in_order(self, pool):
        results = pool.run([("a", lambda: 1), ("b", lambda: 2), ("c", lambda: 3)])
        assert [r.name for r in results] == ["a", "b", "c"]
        assert [r.result for r in results] == [1, 2, 3]
        assert all(r.ok and r.duration_seconds >= 0 for r in results)

    def test_failure_recorded(self, pool):
        def fail():
            raise RuntimeError("solver diverged")

        ok, bad = pool.run([("fine", lambda: 0.0), ("broken", fail)])
        assert ok.status == TaskStatus.COMPLETED
        assert bad.status == TaskStatus.FAILED
        assert isinstance(bad.error, RuntimeError)
        assert bad.result is None
