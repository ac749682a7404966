"""
Parallel transport along path families.

    Φ(t,s)    transport of the connection part: ∂_tΦ = (A_1/t)Φ, Φ(s,s) = I
    Ψ_p(t,s)  superconnection transport: ∂_tΨ_p = Σ_{i=0}^p (A_{i+1}/t)Ψ_{p−i},
              Ψ_0(s,s) = I and Ψ_p(s,s) = 0 for p > 0

Families are consumed through the ContractionField interface so smooth
families (symbolic pullback) and the piecewise-linear simplex families share
one set of solvers. Φ is available three ways (RK4, iterated-integral series,
product limit) and Ψ three ways (joint RK4, the recursion in u, product limit).
"""

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from ..config import settings
from ..exceptions import FamilyError, NonConvergenceError, ShapeMismatchError, VariableClashError
from ..logger import logger
from ..metrics import metrics
from .expr import Chart, ScalarExpr, symbol
from .forms import CompiledForm, CubeForm, cube_wedge, fiber_integrate, pullback, split_t
from .graded import GradedDims, GradedEndo, op_norm
from .quadrature import QuadSpec, gauss_rule, panel_integration
from .superconn import Superconnection

Params = Tuple[float, ...]


# ── Maps and families ───────────────────────────────────

@dataclass(frozen=True)
class SmoothMap:
    """Map from named source axes into a chart, by symbolic components."""

    source: Tuple[str, ...]
    target: Chart
    components: Tuple[sympy.Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "components", tuple(sympy.sympify(c) for c in self.components))
        if len(self.components) != self.target.dim:
            raise ShapeMismatchError(
                f"{len(self.components)} components for a {self.target.dim}-dimensional chart"
            )
        allowed = {symbol(name) for name in self.source}
        for comp in self.components:
            stray = comp.free_symbols - allowed
            if stray:
                raise VariableClashError(
                    f"Component {comp} uses {sorted(s.name for s in stray)} outside {self.source}"
                )

    @classmethod
    def parse(cls, source: Sequence[str], target: Chart, texts: Sequence[str]) -> "SmoothMap":
        return cls(tuple(source), target, tuple(ScalarExpr.parse(t).tree for t in texts))

    def substitute(self, name: str, expr: sympy.Expr) -> "SmoothMap":
        """Precompose: replace source axis `name` by `expr` (in the same axes)."""
        s = symbol(name)
        return SmoothMap(self.source, self.target, tuple(c.xreplace({s: expr}) for c in self.components))

    def compiled(self) -> Callable[..., np.ndarray]:
        fn = sympy.lambdify([symbol(n) for n in self.source], list(self.components), modules="numpy")
        return lambda *values: np.asarray(fn(*values), dtype=float).reshape(-1)


@dataclass(frozen=True)
class PathFamily:
    """A SmoothMap with time axis t and parameter axes (all other source axes)."""

    map: SmoothMap
    breakpoints: Tuple[float, ...] = ()
    name: str = "family"

    def __post_init__(self):
        if "t" not in self.map.source:
            raise FamilyError(f"Family {self.name!r} has no time axis 't'")
        points = tuple(float(b) for b in self.breakpoints)
        if any(not 0.0 < b < 1.0 for b in points) or any(a >= b for a, b in zip(points, points[1:])):
            raise FamilyError(f"Breakpoints of {self.name!r} must increase strictly inside (0, 1)")
        object.__setattr__(self, "breakpoints", points)

    @classmethod
    def parse(
        cls,
        chart: Chart,
        components: Sequence[str],
        params: Sequence[str] = (),
        breakpoints: Sequence[float] = (),
        name: str = "family",
    ) -> "PathFamily":
        return cls(SmoothMap.parse(("t", *params), chart, components), tuple(breakpoints), name)

    @property
    def params(self) -> Tuple[str, ...]:
        return tuple(n for n in self.map.source if n != "t")

    @property
    def k(self) -> int:
        return len(self.params)


# ── Contraction fields ──────────────────────────────────

class ContractionField(ABC):
    """
    What the solvers need from a family at (t, w): the contraction
    Σ_i (A_{i+1}/t) as a CubeForm, the value of A_0, and the breakpoints.
    """

    dims: GradedDims
    k: int

    @abstractmethod
    def contraction(self, t: float, w: Params, max_degree: int, hint: Optional[float] = None) -> CubeForm:
        """Σ_{i ≤ max_degree} (A_{i+1}/t) at (t, w); `hint` is a time strictly inside the current piece."""

    @abstractmethod
    def a0(self, t: float, w: Params) -> GradedEndo:
        """A_0 at the family point (t, w)."""

    @abstractmethod
    def point(self, t: float, w: Params) -> np.ndarray:
        """Chart coordinates of the family point (t, w)."""

    def breakpoints(self, w: Params) -> Tuple[float, ...]:
        return ()

    def generator(self, t: float, w: Params, hint: Optional[float] = None) -> np.ndarray:
        """A_1/t as a plain matrix (zero when absent)."""
        coeff = self.contraction(t, w, 0, hint).terms.get(())
        return coeff.matrix if coeff is not None else np.zeros((self.dims.total, self.dims.total))


class SmoothFamilyField(ContractionField):
    """Contraction field of a smooth family: symbolic pullback, split_t, compile."""

    def __init__(self, family: PathFamily, D: Superconnection):
        if family.map.target.names != D.chart.names:
            raise ShapeMismatchError(f"Family {family.name!r} maps into a different chart")
        self.family = family
        self.dims = D.dims
        self.k = family.k
        args = family.map.source
        axes = family.params
        self._order = [args.index("t")] + [args.index(n) for n in axes]
        self._a0 = CompiledForm(pullback(D.A(0), family.map), args, axes)
        self._over: List[Tuple[int, CompiledForm]] = []
        for p in range(1, min(D.m, self.k + 1) + 1):
            if p not in D.forms:
                continue
            over, _ = split_t(pullback(D.A(p), family.map))
            if not over.is_zero:
                self._over.append((p - 1, CompiledForm(over, args, axes)))
        self._point = family.map.compiled()
        self._check_image(D.chart)

    def _values(self, t: float, w: Params) -> List[float]:
        values = [0.0] * (self.k + 1)
        for slot, value in zip(self._order, (t, *w)):
            values[slot] = float(value)
        return values

    def _check_image(self, chart: Chart) -> None:
        if chart.bounds is None:
            return
        corners = _corners(self.k)
        for w in corners + [tuple(0.5 for _ in range(self.k))]:
            for t in (0.0, 0.25, 0.5, 0.75, 1.0):
                x = self.point(t, w)
                if not chart.contains(x, slack=1e-9):
                    raise FamilyError(f"Family {self.family.name!r} leaves the chart at t={t}, w={w}: {x}")

    def contraction(self, t: float, w: Params, max_degree: int, hint: Optional[float] = None) -> CubeForm:
        values = self._values(t, w)
        total = CubeForm(self.k, self.dims)
        for degree, fn in self._over:
            if degree <= max_degree:
                total = total + fn(*values)
        return total

    def a0(self, t: float, w: Params) -> GradedEndo:
        coeff = self._a0(*self._values(t, w)).terms.get(())
        return coeff if coeff is not None else GradedEndo.zero(self.dims, 1)

    def point(self, t: float, w: Params) -> np.ndarray:
        return self._point(*self._values(t, w))

    def breakpoints(self, w: Params) -> Tuple[float, ...]:
        return self.family.breakpoints


@lru_cache(maxsize=64)
def _smooth_field(family: PathFamily, D: Superconnection) -> SmoothFamilyField:
    return SmoothFamilyField(family, D)


FamilyLike = Union[PathFamily, ContractionField]


def as_field(fam: FamilyLike, D: Superconnection) -> ContractionField:
    return fam if isinstance(fam, ContractionField) else _smooth_field(fam, D)


# ── RK4 machinery ───────────────────────────────────────

def pieces(s: float, t: float, breakpoints: Sequence[float]) -> List[Tuple[float, float]]:
    """[s, t] cut at the breakpoints strictly inside it."""
    cuts = [s] + [b for b in sorted(breakpoints) if s < b < t] + [t]
    return list(zip(cuts, cuts[1:])) if t > s else [(s, t)]


def _rk4(gen, apply, y, a: float, b: float, steps: int):
    """Classic RK4 for y' = apply(gen(u), y); gen is evaluated once per node."""
    h = (b - a) / steps
    c_start = gen(a)
    for n in range(steps):
        u = a + n * h
        c_mid = gen(u + h / 2.0)
        c_end = gen(u + h)
        k1 = apply(c_start, y)
        k2 = apply(c_mid, y + k1 * (h / 2.0))
        k3 = apply(c_mid, y + k2 * (h / 2.0))
        k4 = apply(c_end, y + k3 * h)
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
        c_start = c_end
    metrics.inc("rk4_steps", steps)
    return y


def _check_interval(s: float, t: float) -> None:
    if not 0.0 <= s <= t <= 1.0:
        raise FamilyError(f"Transport needs 0 <= s <= t <= 1, got s={s}, t={t}")


def _phi_matrix(field: ContractionField, w: Params, s: float, t: float, rk4_steps: int) -> np.ndarray:
    quad = QuadSpec(rk4_steps, 1)
    phi = np.eye(field.dims.total)
    for a, b in pieces(s, t, field.breakpoints(w)):
        hint = (a + b) / 2.0
        phi = _rk4(
            lambda u: field.generator(u, w, hint),
            lambda c, y: c @ y,
            phi, a, b, quad.steps_for(b - a),
        )
    return phi


def transport_phi(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection, quad: QuadSpec) -> GradedEndo:
    """Φ(t,s) at parameter w by RK4 with steps snapped to breakpoints."""
    _check_interval(s, t)
    field = as_field(fam, D)
    return GradedEndo(D.dims, 0, _phi_matrix(field, tuple(w), s, t, quad.rk4_steps), check=False)


def transport_psi(
    fam: FamilyLike,
    w: Params,
    s: float,
    t: float,
    D: Superconnection,
    quad: QuadSpec,
    p_max: Optional[int] = None,
) -> Dict[int, CubeForm]:
    """Ψ_p(t,s) for p = 0..p_max by joint RK4 on the triangular system."""
    _check_interval(s, t)
    field = as_field(fam, D)
    p_max = field.k if p_max is None else p_max
    if not 0 <= p_max <= field.k:
        raise ShapeMismatchError(f"p_max={p_max} must lie in [0, {field.k}]")
    w = tuple(w)
    psi = CubeForm.identity(field.k, D.dims)
    for a, b in pieces(s, t, field.breakpoints(w)):
        hint = (a + b) / 2.0
        psi = _rk4(
            lambda u: field.contraction(u, w, p_max, hint),
            lambda c, y: cube_wedge(c, y, max_degree=p_max),
            psi, a, b, quad.steps_for(b - a),
        )
    return {p: psi.component(p) for p in range(p_max + 1)}


def total(psi: Dict[int, CubeForm]) -> CubeForm:
    forms = list(psi.values())
    result = forms[0]
    for form in forms[1:]:
        result = result + form
    return result


# ── Iterated-integral series ────────────────────────────

SERIES_ORDER = 10


def sup_contraction_norm(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection,
                         samples: Optional[int] = None) -> float:
    """Sampled sup over [s, t] of ‖A_1/u‖ (Frobenius)."""
    field = as_field(fam, D)
    samples = samples or settings.series_sup_samples
    best = 0.0
    for a, b in pieces(s, t, field.breakpoints(tuple(w))):
        hint = (a + b) / 2.0
        for u in np.linspace(a, b, max(2, samples)):
            best = max(best, float(np.linalg.norm(field.generator(float(u), tuple(w), hint))))
    return best


def phi_series(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection,
               tol: float = 1e-12) -> GradedEndo:
    """
    Partial sums of Σ_n ∫_{t ≥ u_1 ≥ ⋯ ≥ u_n ≥ s} A(u_1)⋯A(u_n), each term by
    panel-wise Gauss integration; stops once B^n(t−s)^n/n! < tol.
    """
    _check_interval(s, t)
    field = as_field(fam, D)
    w = tuple(w)
    n_total = D.dims.total
    bound = settings.series_safety * sup_contraction_norm(field, w, s, t, D)
    xi, wi, S = panel_integration(SERIES_ORDER)

    panels = []
    for a, b in pieces(s, t, field.breakpoints(w)):
        count = max(1, math.ceil(16 * (b - a)))
        edges = np.linspace(a, b, count + 1)
        for lo, hi in zip(edges, edges[1:]):
            half = (hi - lo) / 2.0
            hint = (lo + hi) / 2.0
            gens = np.array([field.generator(lo + (x + 1.0) * half, w, hint) for x in xi])
            panels.append((half, gens))

    # term values at the panel nodes, ordered panel by panel
    previous = [np.broadcast_to(np.eye(n_total), (SERIES_ORDER, n_total, n_total)) for _ in panels]
    result = np.eye(n_total)
    length = t - s
    n = 0
    while bound ** (n + 1) * length ** (n + 1) / math.factorial(n + 1) >= tol and length > 0:
        n += 1
        if n > settings.series_max_terms:
            raise NonConvergenceError(
                f"Series needs more than {settings.series_max_terms} terms (B={bound:.3g}, t-s={length:.3g})"
            )
        start = np.zeros((n_total, n_total))
        current = []
        for (half, gens), prev in zip(panels, previous):
            integrand = np.einsum("jab,jbc->jac", gens, prev)
            values = start + half * np.einsum("jl,lac->jac", S, integrand)
            start = start + half * np.einsum("l,lac->ac", wi, integrand)
            current.append(values)
        result = result + start
        previous = current
    logger.debug("phi_series used %d terms (B=%.3g)", n, bound)
    return GradedEndo(D.dims, 0, result, check=False)


# ── Product limits ──────────────────────────────────────

def _partition(s: float, t: float, partition: Union[int, Sequence[float]]) -> List[float]:
    if isinstance(partition, int):
        if partition < 1:
            raise FamilyError("A partition needs at least one interval")
        points = list(np.linspace(t, s, partition + 1))
    else:
        points = sorted((float(x) for x in partition), reverse=True)
    if abs(points[0] - t) > 1e-12 or abs(points[-1] - s) > 1e-12:
        raise FamilyError(f"Partition must run from {t} down to {s}")
    return points


def phi_product_limit(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection,
                      partition: Union[int, Sequence[float]]) -> GradedEndo:
    """Π_i (I + (A/u_i)Δ_i), ordered left to right from t down to s, u_i = t_i."""
    field = as_field(fam, D)
    points = _partition(s, t, partition)
    identity = np.eye(D.dims.total)
    product = identity.copy()
    for upper, lower in zip(points, points[1:]):
        hint = (upper + lower) / 2.0
        product = product @ (identity + field.generator(lower, tuple(w), hint) * (upper - lower))
    return GradedEndo(D.dims, 0, product, check=False)


def psi_product_limit(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection,
                      partition: Union[int, Sequence[float]], p_max: Optional[int] = None) -> Dict[int, CubeForm]:
    """The same ordered product with the full contraction Σ_i A_{i+1}/u in place of A_1/u."""
    field = as_field(fam, D)
    p_max = field.k if p_max is None else p_max
    points = _partition(s, t, partition)
    identity = CubeForm.identity(field.k, D.dims)
    product = identity
    for upper, lower in zip(points, points[1:]):
        hint = (upper + lower) / 2.0
        step = identity + field.contraction(lower, tuple(w), p_max, hint) * (upper - lower)
        product = cube_wedge(product, step, max_degree=p_max)
    return {p: product.component(p) for p in range(p_max + 1)}


# ── Recursion in u (independent oracle) ─────────────────

def _rule(a: float, b: float, breakpoints: Sequence[float], quad: QuadSpec) -> List[Tuple[float, float, float]]:
    """(node, weight, piece midpoint) for a composite Gauss rule on [a, b]."""
    order = max(quad.gauss_order, 8)
    panels = max(quad.subdivisions, 4)
    nodes, weights = gauss_rule(order, panels)
    rule = []
    for lo, hi in pieces(a, b, breakpoints):
        if hi <= lo:
            continue
        for x, wt in zip(nodes, weights):
            rule.append((lo + (hi - lo) * float(x), (hi - lo) * float(wt), (lo + hi) / 2.0))
    return rule


def _fundamental(field: ContractionField, w: Params, s: float, nodes: Iterable[float],
                 rk4_steps: int) -> Dict[float, np.ndarray]:
    """F(u) = Φ(u, s) at every node, by one RK4 sweep through the sorted nodes."""
    fundamental: Dict[float, np.ndarray] = {}
    current, previous = np.eye(field.dims.total), s
    for u in sorted(set(nodes) | {s}):
        if u > previous:
            current = _phi_matrix(field, w, previous, u, rk4_steps) @ current
        fundamental[u] = current
        previous = u
    return fundamental


def psi_recursive(fam: FamilyLike, w: Params, s: float, t: float, D: Superconnection,
                  quad: QuadSpec, p: int) -> CubeForm:
    """
    Ψ_p(t,s) = Σ_{q<p} ∫_s^t Φ(t,u)(A_{p−q+1}/u)Ψ_q(u,s) du with Gauss quadrature in u.

    Φ(b,a) = F(b)F(a)⁻¹ with F(u) = Φ(u,s) from one sweep through every node.
    """
    _check_interval(s, t)
    field = as_field(fam, D)
    w = tuple(w)
    breaks = field.breakpoints(w)
    if p == 0:
        return CubeForm.constant(field.k, transport_phi(field, w, s, t, D, quad))

    rules: Dict[float, List[Tuple[float, float, float]]] = {}
    needed = {t}

    def collect(upper: float, depth: int) -> None:
        if upper not in rules:
            rules[upper] = _rule(s, upper, breaks, quad)
        for node, _, _ in rules[upper]:
            needed.add(node)
            if depth > 1:
                collect(node, depth - 1)

    collect(t, p)
    fundamental = _fundamental(field, w, s, needed, quad.rk4_steps)
    inverses = {u: np.linalg.inv(m) for u, m in fundamental.items()}
    memo: Dict[Tuple[int, float], CubeForm] = {}

    def psi(q: int, upper: float) -> CubeForm:
        key = (q, upper)
        if key in memo:
            return memo[key]
        if q == 0:
            value = CubeForm.constant(field.k, GradedEndo(D.dims, 0, fundamental[upper], check=False))
        else:
            value = CubeForm(field.k, D.dims)
            for node, weight, hint in rules[upper]:
                carry = CubeForm.constant(
                    field.k, GradedEndo(D.dims, 0, fundamental[upper] @ inverses[node], check=False)
                )
                contraction = field.contraction(node, w, q, hint)
                for r in range(q):
                    source = contraction.component(q - r)
                    if source.terms:
                        value = value + cube_wedge(carry, cube_wedge(source, psi(r, node))) * weight
        memo[key] = value
        return value

    return psi(p, t).component(p)


def _compositions(p: int) -> List[Tuple[int, ...]]:
    if p == 0:
        return [()]
    return [(first, *rest) for first in range(1, p + 1) for rest in _compositions(p - first)]


def psi_iterated(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec, p: int) -> CubeForm:
    """
    Ψ_p(1,0) as the sum over compositions p = i_1 + ⋯ + i_r (i_j ≥ 1) of

        ∫_{1 ≥ u_1 ≥ ⋯ ≥ u_r ≥ 0} Φ(1,u_1)(A_{i_1+1}/u_1)Φ(u_1,u_2) ⋯ (A_{i_r+1}/u_r)Φ(u_r,0),

    each simplex integral by the collapsed cube map u_j = v_1⋯v_j.
    """
    field = as_field(fam, D)
    w = tuple(w)
    if p == 0:
        return CubeForm.constant(field.k, transport_phi(field, w, 0.0, 1.0, D, quad))
    order = max(quad.gauss_order, 8)
    panels = max(quad.subdivisions, 4)
    nodes, weights = gauss_rule(order, panels)

    # Nodes of the collapsed cube for every simplex depth r ≤ p.
    simplex_rules: Dict[int, List[Tuple[Tuple[float, ...], float]]] = {}
    for r in range(1, p + 1):
        rule = []
        for combo in itertools.product(range(len(nodes)), repeat=r):
            us, u, weight = [], 1.0, 1.0
            for j, i in enumerate(combo):
                u *= float(nodes[i])
                us.append(u)
                weight *= float(weights[i]) * float(nodes[i]) ** (r - 1 - j)
            rule.append((tuple(us), weight))
        simplex_rules[r] = rule

    needed = {1.0} | {u for rule in simplex_rules.values() for us, _ in rule for u in us}
    fundamental = _fundamental(field, w, 0.0, needed, quad.rk4_steps)
    inverses = {u: np.linalg.inv(m) for u, m in fundamental.items()}
    contractions: Dict[float, CubeForm] = {}

    def between(upper: float, lower: float) -> CubeForm:
        return CubeForm.constant(
            field.k, GradedEndo(D.dims, 0, fundamental[upper] @ inverses[lower], check=False)
        )

    result = CubeForm(field.k, D.dims)
    for composition in _compositions(p):
        for us, weight in simplex_rules[len(composition)]:
            term = between(1.0, us[0])
            for j, (i, u) in enumerate(zip(composition, us)):
                if u not in contractions:
                    contractions[u] = field.contraction(u, w, p, u)
                lower = us[j + 1] if j + 1 < len(us) else 0.0
                term = cube_wedge(term, cube_wedge(contractions[u].component(i), between(u, lower)))
                if not term.terms:
                    break
            result = result + term * weight
    return result.component(p)


def infinitesimal_residuals(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec, p: int,
                            s: float, hs: Sequence[float]) -> List[float]:
    """‖Ψ_p(s+h, s) − h·(A_{p+1}/s)‖ for each h."""
    field = as_field(fam, D)
    w = tuple(w)
    leading = field.contraction(s, w, p, s + min(hs) / 2.0).component(p)
    residuals = []
    for h in hs:
        psi = transport_psi(field, w, s, s + h, D, quad, p)[p]
        residuals.append((psi - leading * h).norm())
    return residuals


# ── Integrals over the parameter cube ───────────────────

def integrate_psi(fam: FamilyLike, D: Superconnection, quad: QuadSpec,
                  max_workers: Optional[int] = None) -> GradedEndo:
    """∫_{I^k} Ψ_k(1,0), the top coefficient integrated over the parameters."""
    field = as_field(fam, D)
    k = field.k
    if k == 0:
        return transport_phi(field, (), 0.0, 1.0, D, quad)
    return fiber_integrate(
        lambda w: transport_psi(field, w, 0.0, 1.0, D, quad, k)[k],
        k, quad, degree=-k, dims=D.dims, max_workers=max_workers,
    )


# ── Identity checks ─────────────────────────────────────

def check_chain_map(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec) -> float:
    """‖A_0(γ(1))Φ(1,0) − Φ(1,0)A_0(γ(0))‖."""
    field = as_field(fam, D)
    w = tuple(w)
    phi = transport_phi(field, w, 0.0, 1.0, D, quad)
    return op_norm(field.a0(1.0, w) @ phi - phi @ field.a0(0.0, w))


def _corners(k: int) -> List[Params]:
    return [tuple(float((i >> a) & 1) for a in range(k)) for i in range(2 ** k)]


def _fixed_endpoints(field: ContractionField) -> Tuple[np.ndarray, np.ndarray]:
    corners = _corners(field.k)
    start, end = field.point(0.0, corners[0]), field.point(1.0, corners[0])
    for w in corners[1:] + [tuple(0.5 for _ in range(field.k))]:
        if not (np.allclose(field.point(0.0, w), start, atol=1e-12)
                and np.allclose(field.point(1.0, w), end, atol=1e-12)):
            raise FamilyError("Stokes check needs a family with fixed endpoints")
    return start, end


def has_fixed_endpoints(fam: FamilyLike, D: Superconnection) -> bool:
    try:
        _fixed_endpoints(as_field(fam, D))
    except FamilyError:
        return False
    return True


def check_stokes(fam: FamilyLike, D: Superconnection, quad: QuadSpec, q: Optional[int] = None,
                 max_workers: Optional[int] = None) -> float:
    """
    A_0∫Ψ_q − (−1)^q(∫Ψ_q)A_0 against the boundary integral of Ψ_{q−1}:
    (−1)^{q−1} Σ_i (−1)^i (∫_{w_i=0} − ∫_{w_i=1}) Ψ_{q−1}. The (−1)^{q−1} is the
    Koszul sign of the exterior derivative on the degree 1−q form Ψ_{q−1}.
    """
    field = as_field(fam, D)
    q = field.k if q is None else q
    if q < 1 or q != field.k:
        raise FamilyError(f"Stokes check needs q >= 1 parameters, got q={q} for a {field.k}-parameter family")
    _fixed_endpoints(field)
    interior = integrate_psi(field, D, quad, max_workers)
    start_a0 = field.a0(0.0, tuple(0.5 for _ in range(q)))
    end_a0 = field.a0(1.0, tuple(0.5 for _ in range(q)))
    sign_q = -1.0 if q % 2 else 1.0
    lhs = end_a0 @ interior - (interior @ start_a0) * sign_q

    boundary = GradedEndo.zero(D.dims, 1 - q)
    for i in range(1, q + 1):
        rest = tuple(a for a in range(q) if a != i - 1)
        for value, orientation in ((0.0, 1.0), (1.0, -1.0)):
            def face(v: Params, value=value) -> CubeForm:
                full = list(v)
                full.insert(i - 1, value)
                coeff = transport_psi(field, tuple(full), 0.0, 1.0, D, quad, q - 1)[q - 1].coefficient(rest)
                if coeff is None:
                    return CubeForm(q - 1, D.dims)
                return CubeForm(q - 1, D.dims, {tuple(range(q - 1)): coeff})

            integral = fiber_integrate(face, q - 1, quad, degree=1 - q, dims=D.dims, max_workers=max_workers)
            boundary = boundary + integral * (orientation * (-1.0) ** i)
    koszul = -1.0 if (q - 1) % 2 else 1.0
    return op_norm(lhs - boundary * koszul)


def check_factorization(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec,
                        u_mid: float, p_max: Optional[int] = None) -> float:
    """max_p ‖Ψ_p(1,0) − Σ_q Ψ_{p−q}(1,u)Ψ_q(u,0)‖."""
    if not 0.0 <= u_mid <= 1.0:
        raise FamilyError(f"u_mid must lie in [0, 1], got {u_mid}")
    field = as_field(fam, D)
    w = tuple(w)
    p_max = field.k if p_max is None else p_max
    whole = transport_psi(field, w, 0.0, 1.0, D, quad, p_max)
    upper = total(transport_psi(field, w, u_mid, 1.0, D, quad, p_max))
    lower = total(transport_psi(field, w, 0.0, u_mid, D, quad, p_max))
    composite = cube_wedge(upper, lower, max_degree=p_max)
    return max((whole[p] - composite.component(p)).norm() for p in range(p_max + 1))


def check_reparam(fam: PathFamily, reparam: SmoothMap, D: Superconnection, quad: QuadSpec,
                  w: Optional[Params] = None, p_max: Optional[int] = None) -> float:
    """max_p ‖Ψ_p(1,0)[fam] − Ψ_p(1,0)[fam∘φ]‖ for an endpoint-fixing monotone φ."""
    if fam.breakpoints:
        raise FamilyError("Reparametrizing a piecewise family is not supported")
    if len(reparam.components) != 1:
        raise FamilyError("A reparametrization has exactly one component (the new t)")
    extra = set(reparam.source) - set(fam.map.source)
    if extra:
        raise VariableClashError(f"Reparametrization uses axes {sorted(extra)} unknown to the family")
    phi = reparam.components[0]
    fn = sympy.lambdify([symbol(n) for n in fam.map.source], phi, modules="math")
    k = fam.k
    samples = np.linspace(0.0, 1.0, 64)
    for corner in _corners(k) + [tuple(0.5 for _ in range(k))]:
        def at(t: float) -> float:
            values = dict(zip(fam.params, corner))
            values["t"] = t
            return float(fn(*(values[n] for n in fam.map.source)))

        if abs(at(0.0)) > 1e-12 or abs(at(1.0) - 1.0) > 1e-12:
            raise FamilyError("Reparametrization must fix t = 0 and t = 1")
        values = [at(float(t)) for t in samples]
        if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
            raise FamilyError("Reparametrization is not monotone on the sampled points")

    composed = PathFamily(fam.map.substitute("t", phi), (), f"{fam.name}∘φ")
    w = tuple(0.5 for _ in range(k)) if w is None else tuple(w)
    p_max = k if p_max is None else p_max
    original = transport_psi(fam, w, 0.0, 1.0, D, quad, p_max)
    moved = transport_psi(composed, w, 0.0, 1.0, D, quad, p_max)
    return max((original[p] - moved[p]).norm() for p in range(p_max + 1))


@dataclass(frozen=True)
class DsConvergence:
    """∂/∂s residuals at step h and h/2."""

    h: float
    coarse: float
    fine: float

    @property
    def residual(self) -> float:
        return max(self.coarse, self.fine)

    @property
    def ratio(self) -> float:
        """coarse/fine, about 4 for a second-order difference; inf once both sit at round-off."""
        if self.fine <= 1e-13 or self.coarse <= 1e-11:
            return math.inf
        return self.coarse / self.fine


def _ds_residual(field: ContractionField, w: Params, D: Superconnection, quad: QuadSpec,
                 p: int, s: float, h: float) -> float:
    forward = transport_psi(field, w, s + h, 1.0, D, quad, p)[p]
    backward = transport_psi(field, w, s - h, 1.0, D, quad, p)[p]
    slope = (forward - backward) * (1.0 / (2.0 * h))
    at_s = total(transport_psi(field, w, s, 1.0, D, quad, p))
    rhs = -cube_wedge(at_s, field.contraction(s, w, p, s + h / 2.0), max_degree=p).component(p)
    return (slope - rhs).norm()


def ds_convergence(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec, p: int,
                   s: float = 0.3, h: float = 1e-2) -> DsConvergence:
    """Central differences of Ψ_p(1,s) in s at h and h/2 against −Σ_j Ψ_{p−j}(1,s)(A_{j+1}/s)."""
    field = as_field(fam, D)
    w = tuple(w)
    if p > field.k:
        raise ShapeMismatchError(f"p={p} exceeds the {field.k} parameter axes")
    if not (0.0 < s - h and s + h < 1.0):
        raise FamilyError(f"s ± h must stay inside (0, 1), got s={s}, h={h}")
    result = DsConvergence(h, _ds_residual(field, w, D, quad, p, s, h), _ds_residual(field, w, D, quad, p, s, h / 2.0))
    logger.debug("ds residuals %.3e, %.3e (ratio %.2f)", result.coarse, result.fine, result.ratio)
    return result


def check_ds(fam: FamilyLike, w: Params, D: Superconnection, quad: QuadSpec, p: int,
             s: float = 0.3, h: float = 1e-2) -> float:
    """Worse of the two ∂/∂s residuals."""
    return ds_convergence(fam, w, D, quad, p, s, h).residual
