"""
Shared test fixtures for the superconnection verifier test suite.

Provides reusable fixtures for:
  - Charts, graded dimensions and quadrature specs
  - The trivial, non-flat witness and gauge-transformed flat superconnections
  - Bundled scenario files and temporary copies
"""

import json
import os
import shutil
from pathlib import Path
from typing import Generator

import pytest

# Keep tests independent of a developer's .env
os.environ.setdefault("SCT_LOG_LEVEL", "WARNING")
os.environ.setdefault("SCT_MAX_WORKERS", "2")

from src.config import SCENARIO_DIR  # noqa: E402
from src.core.expr import Chart  # noqa: E402
from src.core.graded import GradedDims  # noqa: E402
from src.core.quadrature import QuadSpec  # noqa: E402
from src.core.superconn import Superconnection, const_superconnection  # noqa: E402
from src.metrics import metrics  # noqa: E402
from src.scenario import build_workspace, load_scenario  # noqa: E402


# ── Geometry Fixtures ──────────────────────────────────

@pytest.fixture()
def chart2() -> Chart:
    """Unit square with coordinates x1, x2."""
    return Chart(("x1", "x2"), ((0.0, 1.0), (0.0, 1.0)))


@pytest.fixture()
def dims_line() -> GradedDims:
    return GradedDims.of({0: 1})


@pytest.fixture()
def dims_complex() -> GradedDims:
    """V^0 = R^2, V^1 = R, V^2 = R."""
    return GradedDims.of({0: 2, 1: 1, 2: 1})


@pytest.fixture()
def quad() -> QuadSpec:
    """Reduced RK4 resolution; enough for 1e-6 on the bundled data."""
    return QuadSpec(rk4_steps=400, gauss_order=6, subdivisions=1)


@pytest.fixture()
def fine_quad() -> QuadSpec:
    return QuadSpec(rk4_steps=1000, gauss_order=8, subdivisions=1)


# ── Superconnection Fixtures ───────────────────────────

@pytest.fixture()
def trivial_D(chart2, dims_line) -> Superconnection:
    """D = d."""
    return Superconnection.trivial(chart2, dims_line)


@pytest.fixture()
def witness_D(dims_line) -> Superconnection:
    """A_1 = x2 dx1; F_1 = -dx1 dx2 has norm 1."""
    from src.scenario import build_superconnection, validate_scenario

    scenario = validate_scenario(json.loads((SCENARIO_DIR / "nonflat_witness.json").read_text()))
    return build_superconnection(scenario, Chart(("x1", "x2")), dims_line)


@pytest.fixture()
def constant_A2_D(chart2, dims_complex) -> Superconnection:
    """Flat: A_0 = δ (V^0 → V^1) and A_2 = c dx1∧dx2 ⊗ E(V^2 → V^1), c = 1.5."""
    n = dims_complex.total
    delta = [[0] * n for _ in range(n)]
    delta[2][0] = 1
    top = [[0] * n for _ in range(n)]
    top[2][3] = 1.5
    return const_superconnection(dims_complex, {0: {(): delta}, 2: {("x1", "x2"): top}}, chart2)


@pytest.fixture()
def flat_workspace():
    """The gauge-transformed flat scenario at test resolution."""
    return build_workspace(load_scenario(SCENARIO_DIR / "flat_gauge.json"), rk4_steps=400)


@pytest.fixture()
def volume_workspace():
    """Flat data on three coordinates where A_3 feeds a nonzero Ψ_2."""
    return build_workspace(load_scenario(SCENARIO_DIR / "flat_volume.json"), rk4_steps=200)


@pytest.fixture()
def flat_D(flat_workspace) -> Superconnection:
    return flat_workspace.D


# ── Scenario File Fixtures ─────────────────────────────

@pytest.fixture()
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture()
def tmp_scenario(tmp_path) -> Generator:
    """Write a scenario dict to a temporary file and return its path."""
    def write(document: dict, name: str = "scenario.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    yield write


@pytest.fixture()
def trivial_copy(tmp_path) -> Path:
    target = tmp_path / "trivial.json"
    shutil.copy(SCENARIO_DIR / "trivial.json", target)
    return target


# ── Metrics ────────────────────────────────────────────

@pytest.fixture(autouse=True)
def _reset_metrics():
    metrics.reset()
    yield
    metrics.reset()
