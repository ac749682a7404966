"""Tests for the run metrics collector."""

import time

import pytest

from src.metrics import MetricsCollector


@pytest.fixture()
def collector():
    """Fresh metrics collector for each test."""
    return MetricsCollector(max_samples=10)


class TestCounters:
    def test_increment(self, collector):
        collector.inc("rk4_steps")
        collector.inc("rk4_steps")
        collector.inc("rk4_steps", 3)
        assert collector._counters["rk4_steps"] == 5


class TestGauges:
    def test_set(self, collector):
        collector.set_gauge("worst_residual", 0.5)
        assert collector._gauges["worst_residual"] == 0.5

    def test_max(self, collector):
        collector.max_gauge("worst_residual", 1e-3)
        collector.max_gauge("worst_residual", 1e-9)
        assert collector._gauges["worst_residual"] == 1e-3
        collector.max_gauge("worst_residual", 2.0)
        assert collector._gauges["worst_residual"] == 2.0


class TestSamples:
    def test_rolling_window(self, collector):
        for i in range(20):
            collector.observe("check.stokes", float(i))
        assert len(collector._samples["check.stokes"]) == 10
        assert collector._samples["check.stokes"][0] == 10.0


class TestTimer:
    def test_timer(self, collector):
        with collector.timer("load") as t:
            time.sleep(0.01)
        assert len(collector._samples["load"]) == 1
        assert collector._samples["load"][0] >= 0.01
        assert t.elapsed_ms >= 10.0


class TestExport:
    def test_dict_export(self, collector):
        collector.inc("rk4_steps", 10)
        collector.set_gauge("worst_residual", 0.25)
        collector.observe("run", 0.5)
        collector.observe("run", 1.5)

        data = collector.to_dict()
        assert data["counters"]["rk4_steps"] == 10
        assert data["gauges"]["worst_residual"] == 0.25
        assert data["timings"]["run"] == {"count": 2, "total_s": 2.0, "avg_s": 1.0, "max_s": 1.5}

    def test_empty_export(self, collector):
        assert collector.to_dict() == {"counters": {}, "gauges": {}, "timings": {}}


class TestReset:
    def test_reset(self, collector):
        collector.inc("x", 5)
        collector.set_gauge("y", 10)
        collector.observe("z", 1.0)
        collector.reset()
        assert len(collector._counters) == 0
        assert len(collector._gauges) == 0
        assert len(collector._samples) == 0
