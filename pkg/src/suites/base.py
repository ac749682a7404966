"""
Check descriptors and the runner that turns them into report records.

A suite builder returns `Check`s without running anything; the runner fans
them out over the worker pool and assembles records in declaration order.
"""

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Generic, List, Mapping, Optional, TypeVar

from ..core.quadrature import QuadSpec
from ..exceptions import SCTError
from ..logger import logger
from ..metrics import metrics
from ..models import CheckRecord, Report
from ..scenario import Workspace
from ..tasks import WorkerPool
from ..utils import inputs_digest, resolve_tolerance

T = TypeVar("T")


@dataclass
class Check:
    name: str
    suite: str
    kind: str
    run: Callable[[], float]
    params: Dict[str, Any] = field(default_factory=dict)


class Shared(Generic[T]):
    """Compute a value once for several checks that report parts of it."""

    def __init__(self, compute: Callable[[], T]):
        self._compute = compute
        self._lock = threading.Lock()
        self._done = False
        self._value: Optional[T] = None

    def get(self) -> T:
        with self._lock:
            if not self._done:
                self._value = self._compute()
                self._done = True
        return self._value  # type: ignore[return-value]


def quad_params(quad: QuadSpec) -> Dict[str, int]:
    return {"rk4_steps": quad.rk4_steps, "gauss_order": quad.gauss_order, "subdivisions": quad.subdivisions}


def flag(ok: bool) -> float:
    """Boolean checks report residual 0 on success and 1 on failure."""
    return 0.0 if ok else 1.0


def _timed(check: Check) -> Callable[[], float]:
    def run() -> float:
        with metrics.timer(f"check.{check.suite}") as timer:
            residual = float(check.run())
        logger.info(
            "%s residual %.3e", check.name, residual,
            extra={"check": check.name, "residual": residual, "duration_ms": timer.elapsed_ms},
        )
        return residual
    return run


def run_checks(
    checks: List[Check],
    workspace: Workspace,
    quad: QuadSpec,
    overrides: Optional[Mapping[str, float]] = None,
    max_workers: Optional[int] = None,
) -> Report:
    """Run every check; the first failure (in declaration order) is re-raised."""
    scenario = workspace.scenario
    body = scenario.model_dump(mode="json")
    results = WorkerPool(max_workers).run([(check.name, _timed(check)) for check in checks])

    records: List[CheckRecord] = []
    for check, result in zip(checks, results):
        if not result.ok:
            error = result.error
            if isinstance(error, SCTError):
                raise error
            raise SCTError(f"{check.name}: {type(error).__name__}: {error}") from error
        residual = float(result.result)
        tolerance = resolve_tolerance(check.name, check.kind, scenario.tolerances, overrides or {})
        passed = residual <= tolerance
        if math.isnan(residual):
            logger.warning("%s produced NaN", check.name, extra={"check": check.name})
        metrics.max_gauge("worst_residual", residual if math.isfinite(residual) else float("inf"))
        records.append(CheckRecord(
            name=check.name,
            suite=check.suite,
            inputs_digest=inputs_digest(check.suite, check.name, body, quad_params(quad), check.params),
            residual=residual,
            tolerance=tolerance,
            passed=passed,
        ))
        if not passed:
            logger.warning(
                "%s failed: %.3e > %.1e", check.name, residual, tolerance,
                extra={"check": check.name, "residual": residual, "tolerance": tolerance},
            )
    return Report(scenario=scenario.name, checks=records, timing=metrics.to_dict())
