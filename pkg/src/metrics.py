"""
Run metrics: counters, gauges and timing samples for verification runs.

Every check executed by the CLI is timed here; the report's timing section is
built from `metrics.to_dict()`.

Usage:
    from src.metrics import metrics
    with metrics.timer("check.stokes") as t:
        ...
    t.elapsed_ms
"""

import time
import threading
from collections import defaultdict
from typing import Dict, List


class MetricsCollector:
    """Thread-safe in-memory metrics collector."""

    def __init__(self, max_samples: int = 1000):
        self._lock = threading.Lock()
        self._counters: Dict[str, float] = defaultdict(float)
        self._gauges: Dict[str, float] = {}
        self._samples: Dict[str, List[float]] = defaultdict(list)
        self._max_samples = max_samples

    # ── Counters ──────────────────────────────────────

    def inc(self, name: str, value: float = 1) -> None:
        """Increment a counter (e.g. rk4 steps, quadrature nodes)."""
        with self._lock:
            self._counters[name] += value

    # ── Gauges ────────────────────────────────────────

    def set_gauge(self, name: str, value: float) -> None:
        """Set a gauge, e.g. the worst residual seen so far."""
        with self._lock:
            self._gauges[name] = value

    def max_gauge(self, name: str, value: float) -> None:
        """Raise a gauge to `value` if it is larger than the current one."""
        with self._lock:
            self._gauges[name] = max(self._gauges.get(name, value), value)

    # ── Timing samples ────────────────────────────────

    def observe(self, name: str, value: float) -> None:
        """Record a duration in seconds."""
        with self._lock:
            samples = self._samples[name]
            samples.append(value)
            if len(samples) > self._max_samples:
                self._samples[name] = samples[-self._max_samples:]

    class _Timer:
        """Context manager for timing a block; exposes the elapsed time afterwards."""

        def __init__(self, collector: "MetricsCollector", name: str):
            self._collector = collector
            self._name = name
            self._start = 0.0
            self.elapsed = 0.0

        def __enter__(self):
            self._start = time.perf_counter()
            return self

        def __exit__(self, *args):
            self.elapsed = time.perf_counter() - self._start
            self._collector.observe(self._name, self.elapsed)

        @property
        def elapsed_ms(self) -> float:
            return round(self.elapsed * 1000.0, 3)

    def timer(self, name: str) -> _Timer:
        """Return a context manager that times a block and records the duration."""
        return self._Timer(self, name)

    # ── Export ────────────────────────────────────────

    def to_dict(self) -> dict:
        """Export metrics as a plain dict (for the report's timing section)."""
        with self._lock:
            result = {
                "counters": dict(self._counters),
                "gauges": dict(self._gauges),
                "timings": {},
            }
            for name, samples in self._samples.items():
                if not samples:
                    continue
                ordered = sorted(samples)
                count = len(ordered)
                total = sum(ordered)
                result["timings"][name] = {
                    "count": count,
                    "total_s": round(total, 4),
                    "avg_s": round(total / count, 4),
                    "max_s": round(ordered[-1], 4),
                }
            return result

    def reset(self) -> None:
        """Reset all metrics (between runs and in tests)."""
        with self._lock:
            self._counters.clear()
            self._gauges.clear()
            self._samples.clear()


# ── Module-level singleton ──

metrics = MetricsCollector()
