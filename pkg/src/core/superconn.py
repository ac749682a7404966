"""
Superconnections D = d − A_0 − A_1 − ⋯ − A_m and their flatness residuals.

A_p is an EndForm of form degree p and endo degree 1 − p. D is flat iff for
every q ≥ −1

    F_q := dA_q − Σ_{i=0}^{q+1} A_i A_{q+1−i} = 0      (A_{−1} = 0).
"""

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy

from ..config import settings
from ..exceptions import EvaluationError, InverseCheckError, ShapeMismatchError
from ..logger import logger
from ..tasks import parallel_map
from .expr import Chart
from .forms import CompiledForm, EndForm, ext_d, wedge
from .graded import GradedDims, GradedEndo

Point = Tuple[float, ...]


class Superconnection:
    """Chart, graded dims and the forms A_p (absent = zero)."""

    def __init__(self, chart: Chart, dims: GradedDims, forms: Mapping[int, EndForm]):
        self.chart = chart
        self.dims = dims
        self.forms: Dict[int, EndForm] = {}
        for p, form in sorted(forms.items()):
            if form.p != p or form.e != 1 - p:
                raise ShapeMismatchError(
                    f"A_{p} must have form degree {p} and endo degree {1 - p}, got ({form.p}, {form.e})"
                )
            if form.chart != chart or form.dims != dims:
                raise ShapeMismatchError(f"A_{p} lives on a different chart or graded space")
            if not form.is_zero:
                self.forms[p] = form

    @classmethod
    def trivial(cls, chart: Chart, dims: GradedDims) -> "Superconnection":
        """D = d."""
        return cls(chart, dims, {})

    @property
    def m(self) -> int:
        return self.chart.dim

    def A(self, p: int) -> EndForm:
        if p in self.forms:
            return self.forms[p]
        return EndForm.zero(self.chart, self.dims, max(p, 0), 1 - p)

    def __repr__(self) -> str:
        return f"Superconnection(chart={self.chart.names}, dims={dict(self.dims.dims)}, A={sorted(self.forms)})"


@dataclass
class FlatnessReport:
    residuals: Dict[int, float]
    grid_size: int
    worst_points: Dict[int, Point] = field(default_factory=dict)

    @property
    def overall(self) -> float:
        return max(self.residuals.values(), default=0.0)


def curvature(D: Superconnection) -> Dict[int, EndForm]:
    """F_q for q = −1 .. 2m−1 (form degree q+1, endo degree 1−q)."""
    result: Dict[int, EndForm] = {}
    for q in range(-1, 2 * D.m):
        total = ext_d(D.A(q)) if q >= 0 else EndForm.zero(D.chart, D.dims, 0, 2)
        for i in range(0, q + 2):
            j = q + 1 - i
            if i in D.forms and j in D.forms:
                total = total - wedge(D.forms[i], D.forms[j])
        result[q] = total
    return result


def sample_grid(chart: Chart, points_per_axis: Optional[int] = None) -> List[Point]:
    """Cell-centre lattice strictly inside the chart box (about 10^min(m,3) points)."""
    m = chart.dim
    if points_per_axis is None:
        per_axis = settings.flatness_grid_points
        points_per_axis = per_axis if m <= 3 else max(2, int(round(per_axis ** (3.0 / m))))
    axes = [
        [lo + (i + 0.5) * (hi - lo) / points_per_axis for i in range(points_per_axis)]
        for lo, hi in chart.box()
    ]
    return [tuple(p) for p in itertools.product(*axes)]


def flatness_residuals(
    D: Superconnection,
    grid: Optional[Sequence[Point]] = None,
    max_workers: Optional[int] = None,
) -> FlatnessReport:
    """Sup over the grid of ‖F_q‖ for every q."""
    grid = list(grid) if grid is not None else sample_grid(D.chart)
    names = D.chart.names
    compiled = {
        q: CompiledForm(F, names, names) for q, F in curvature(D).items() if not F.is_zero
    }

    def at(point: Point) -> Dict[int, float]:
        try:
            return {q: fn(*point).norm() for q, fn in compiled.items()}
        except EvaluationError as exc:
            raise EvaluationError(f"Curvature evaluation failed at {dict(zip(names, point))}: {exc.detail}") from exc

    values = parallel_map(at, grid, max_workers)
    residuals = {q: 0.0 for q in range(-1, 2 * D.m)}
    worst: Dict[int, Point] = {}
    for point, row in zip(grid, values):
        for q, value in row.items():
            if value > residuals[q]:
                residuals[q] = value
                worst[q] = point
    report = FlatnessReport(residuals=residuals, grid_size=len(grid), worst_points=worst)
    logger.debug("Flatness residuals over %d points: %s", len(grid), report.residuals)
    return report


def is_flat(D: Superconnection, grid: Optional[Sequence[Point]] = None, tol: Optional[float] = None) -> bool:
    """Overall residual within `tol` (settings.tol_exact by default)."""
    return flatness_residuals(D, grid).overall <= (settings.tol_exact if tol is None else tol)


def gauge_transform(
    D: Superconnection,
    g: EndForm,
    g_inv: EndForm,
    seed: Optional[int] = None,
    tol: float = 1e-10,
) -> Superconnection:
    """
    A'_1 = g⁻¹A_1g − g⁻¹dg and A'_p = g⁻¹A_pg otherwise.

    The supplied inverse is checked numerically at random points of the chart.
    """
    if (g.p, g.e) != (0, 0) or (g_inv.p, g_inv.e) != (0, 0):
        raise ShapeMismatchError("Gauge and inverse must be 0-forms of endo degree 0")
    rng = random.Random(settings.seed if seed is None else seed)
    product = CompiledForm(wedge(g, g_inv), D.chart.names, D.chart.names)
    identity = np.eye(D.dims.total)
    for _ in range(settings.inverse_check_points):
        point = tuple(rng.uniform(lo, hi) for lo, hi in D.chart.box())
        value = product(*point).terms.get(())
        got = value.matrix if value is not None else np.zeros_like(identity)
        if np.max(np.abs(got - identity)) > tol:
            raise InverseCheckError(f"g * g_inv differs from the identity at {point}")

    forms: Dict[int, EndForm] = {}
    for p in range(0, D.m + 1):
        conjugated = wedge(wedge(g_inv, D.A(p)), g)
        if p == 1:
            conjugated = conjugated - wedge(g_inv, ext_d(g))
        forms[p] = conjugated
    return Superconnection(D.chart, D.dims, forms)


def _constant(value) -> sympy.Expr:
    if isinstance(value, float):
        return sympy.Float(value)
    return sympy.sympify(value)


def const_superconnection(
    dims: GradedDims,
    deltas: Mapping[int, Mapping[Tuple[str, ...], Sequence[Sequence[object]]]],
    chart: Optional[Chart] = None,
) -> Superconnection:
    """
    Constant-coefficient superconnection.

    deltas: p → {coordinate-name tuple → full N×N matrix}; A_0 uses the key ().
    chart may be omitted only when A_0 is the sole form (the unit square is used).
    """
    if chart is None:
        if any(p > 0 and monomials for p, monomials in deltas.items()):
            raise ShapeMismatchError("Forms of positive degree need an explicit chart")
        chart = Chart.standard(2)
    forms: Dict[int, EndForm] = {}
    for p, monomials in deltas.items():
        coeffs = {}
        for names, matrix in monomials.items():
            if len(names) != p:
                raise ShapeMismatchError(f"A_{p} monomial {names} has the wrong length")
            order = [chart.index(n) for n in names]
            sign = 1
            for a in range(len(order)):
                for b in range(a + 1, len(order)):
                    if order[a] > order[b]:
                        sign = -sign
            entries = sympy.Matrix([[_constant(v) for v in row] for row in matrix]) * sign
            key = tuple(sorted(order))
            coeffs[key] = coeffs[key] + entries if key in coeffs else entries
        forms[p] = EndForm(chart, dims, p, 1 - p, coeffs)
    return Superconnection(chart, dims, forms)
