"""
Simplices, the piecewise-linear path family θ_(k), and the cochain ψ.

    Δ^k      = {1 ≥ y_1 ≥ ⋯ ≥ y_k ≥ 0}, vertices v_i = (1,…,1,0,…,0) (i ones)
    π_k(x)_i = max(x_i, …, x_k)
    λ_w      runs backwards through Σ_{i≤k} w_ie_i → ⋯ → w_1e_1 → 0 (w_k = 1),
             λ_w(1 − j/k) = Σ_{i≤j} w_ie_i
    θ_w      = π_k ∘ λ_w, a path from v_k (t = 0) to v_0 (t = 1)

Geometry helpers accept Fractions and stay exact; the quadrature path uses
floats with breakpoints placed exactly at every kink of θ_w.
"""

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from ..config import settings
from ..exceptions import FamilyError, IndexRangeError, OutOfRangeError, ShapeMismatchError
from ..logger import logger
from .expr import Chart, ScalarExpr, symbol
from .forms import CompiledForm, CubeForm
from .graded import GradedEndo, compose, op_norm
from .quadrature import QuadSpec
from .superconn import Superconnection
from .transport import ContractionField, SmoothMap, integrate_psi

Number = Union[Fraction, float, int]
Point = Tuple[Number, ...]
PathFn = Callable[[Number], Point]


# ── Exact PL geometry ───────────────────────────────────

def pi_k(x: Sequence[Number]) -> Point:
    """Retraction I^k → Δ^k, y_i = max(x_i, …, x_k)."""
    for value in x:
        if not 0 <= value <= 1:
            raise OutOfRangeError(f"pi_k needs a point of the unit cube, got {tuple(x)}")
    result = []
    running: Number = 0
    for value in reversed(x):
        running = max(running, value)
        result.append(running)
    return tuple(reversed(result))


def lambda_path(w: Sequence[Number], t: Number) -> Point:
    """λ_w(t) in I^k for w ∈ I^{k−1}, linear between the times j/k."""
    if not 0 <= t <= 1:
        raise OutOfRangeError(f"Path time must lie in [0, 1], got {t}")
    k = len(w) + 1
    weights = list(w) + [1]
    travelled = k * (1 - t)
    j = min(int(math.floor(travelled)), k - 1)
    s = travelled - j
    point: List[Number] = [0] * k
    for i in range(j):
        point[i] = weights[i]
    point[j] = s * weights[j]
    return tuple(point)


def theta(k: int, w: Sequence[Number], t: Number) -> Point:
    if k < 1:
        raise IndexRangeError(f"theta needs k >= 1, got {k}")
    if len(w) != k - 1:
        raise IndexRangeError(f"theta_({k}) takes {k - 1} parameters, got {len(w)}")
    return pi_k(lambda_path(w, t))


def vertex(k: int, i: int) -> Point:
    if not 0 <= i <= k:
        raise IndexRangeError(f"Vertex v_{i} does not exist in a {k}-simplex")
    return tuple(Fraction(1) if a < i else Fraction(0) for a in range(k))


def affine_point(vertices: Sequence[int], k: int, y: Sequence[Number]) -> Point:
    """Image of y ∈ Δ^m under [v_{j_0}, …, v_{j_m}]: Δ^m → Δ^k."""
    m = len(vertices) - 1
    if len(y) != m:
        raise IndexRangeError(f"Expected a point of Δ^{m}, got {len(y)} coordinates")
    padded = [Fraction(1), *y, Fraction(0)]
    point = []
    for i in range(1, k + 1):
        first = next((l for l, j in enumerate(vertices) if j >= i), None)
        point.append(padded[first] if first is not None else padded[m + 1])
    return tuple(point)


def omega_reparam(k: int, i: int, gamma: PathFn) -> PathFn:
    """
    The three-piece reparametrization attached to the face w_i = 0 of I^{k−1}:
    γ sped up on [0, (k−i)/k], paused for one step, sped up again.
    """
    first, second = Fraction(k - i, k), Fraction(k - i + 1, k)

    def reparam(t: Number) -> Point:
        if t <= first:
            return gamma(k * t / (k - 1))
        if t <= second:
            return gamma(Fraction(k - i, k - 1))
        return gamma((k * t - 1) / (k - 1))

    return reparam


def mu_compose(k: int, i: int, alpha: PathFn, beta: PathFn) -> PathFn:
    """
    Composition attached to the face w_i = 1: β on the back face b_j (j = k − i)
    first, then α on the front face f_i.
    """
    j = k - i
    back = list(range(i, k + 1))
    front = list(range(0, i + 1))

    def composed(t: Number) -> Point:
        if t <= Fraction(j, k):
            return affine_point(back, k, beta(k * t / j))
        return affine_point(front, k, alpha(Fraction(k, i) * (t - Fraction(j, k))))

    return composed


@dataclass
class FaceLemmaResult:
    ok: bool
    checked: int
    witness: Optional[Dict[str, object]] = None


def _random_fraction(rng: random.Random) -> Fraction:
    denominator = rng.randint(1, 97)
    return Fraction(rng.randint(0, denominator), denominator)


def check_face_lemmas(
    k: int,
    theta_fn: Callable[[int, Sequence[Number], Number], Point] = theta,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> FaceLemmaResult:
    """
    On each face of I^{k−1}, compare θ_fn against the reference paths:

        θ(k)(…, w_i = 0, …)(t) = ∂̂_i(ω_i(θ(k−1)(w))(t))
        θ(k)(…, w_i = 1, …)(t) = μ_{i,k−i}(θ(i)(front), θ(k−i)(back))(t)

    exactly in rational arithmetic. The first failure is returned as witness.
    """
    if not 2 <= k <= 4:
        raise IndexRangeError(f"Face lemmas are checked for 2 <= k <= 4, got {k}")
    rng = random.Random(settings.seed if seed is None else seed)
    samples = samples or settings.face_lemma_samples
    checked = 0
    for i in range(1, k):
        face_vertices = [v for v in range(k + 1) if v != i]
        for _ in range(samples):
            w = [_random_fraction(rng) for _ in range(k - 2)]
            t = _random_fraction(rng)

            lower = list(w)
            lower.insert(i - 1, Fraction(0))
            got = theta_fn(k, lower, t)
            smaller = omega_reparam(k, i, lambda s: theta(k - 1, w, s))
            expected = affine_point(face_vertices, k, smaller(t))
            checked += 1
            if tuple(got) != tuple(expected):
                return FaceLemmaResult(False, checked, {
                    "face": f"w_{i}=0", "w": [str(x) for x in lower], "t": str(t),
                    "got": [str(x) for x in got], "expected": [str(x) for x in expected],
                })

            upper = list(w)
            upper.insert(i - 1, Fraction(1))
            front, back = w[: i - 1], w[i - 1:]
            joined = mu_compose(
                k, i,
                lambda s: theta(i, front, s),
                lambda s: theta(k - i, back, s),
            )
            got = theta_fn(k, upper, t)
            expected = joined(t)
            checked += 1
            if tuple(got) != tuple(expected):
                return FaceLemmaResult(False, checked, {
                    "face": f"w_{i}=1", "w": [str(x) for x in upper], "t": str(t),
                    "got": [str(x) for x in got], "expected": [str(x) for x in expected],
                })
    return FaceLemmaResult(True, checked)


def theta_kinks(w: Sequence[float]) -> Tuple[float, ...]:
    """Every time in (0, 1) where θ_w is not linear: the j/k plus the π_k switches."""
    k = len(w) + 1
    weights = list(w) + [1.0]
    times = {j / k for j in range(1, k)}
    for j in range(k):
        moving = weights[j]
        if moving <= 0:
            continue
        for i in range(j):
            s = max(weights[i:j]) / moving
            if 0.0 < s < 1.0:
                times.add(1.0 - (j + s) / k)
    return tuple(sorted(t for t in times if 0.0 < t < 1.0))


def theta_jacobian(w: Sequence[float], t: float, hint: float) -> np.ndarray:
    """
    (k × k) derivative of (t, w) ↦ θ_w(t), columns t, w_1, …, w_{k−1}.

    `hint` is a time inside the current linearity piece and selects which
    coordinates are moving.
    """
    k = len(w) + 1
    weights = list(w) + [1.0]
    j = min(int(math.floor(k * (1.0 - hint))), k - 1)
    s_hint = k * (1.0 - hint) - j
    s = k * (1.0 - t) - j
    jac = np.zeros((k, k))
    for i in range(j + 1):
        held = weights[i:j]
        if not held or s_hint * weights[j] > max(held):
            jac[i, 0] = -k * weights[j]
            if j < k - 1:
                jac[i, j + 1] = s
        else:
            a = i + int(np.argmax(held))
            jac[i, a + 1] = 1.0
    return jac


# ── Simplices ───────────────────────────────────────────

@dataclass(frozen=True)
class AffineOp:
    """Face i, front face f_p, back face b_q or vertex extraction."""

    kind: str
    index: int

    KINDS = ("face", "front", "back", "vertex")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise IndexRangeError(f"Unknown affine operation {self.kind!r}")

    def vertices(self, k: int) -> List[int]:
        i = self.index
        if self.kind == "face":
            if not 0 <= i <= k or k < 1:
                raise IndexRangeError(f"Face {i} of a {k}-simplex")
            return [v for v in range(k + 1) if v != i]
        if not 0 <= i <= k:
            raise IndexRangeError(f"{self.kind} {i} of a {k}-simplex")
        if self.kind == "front":
            return list(range(0, i + 1))
        if self.kind == "back":
            return list(range(k - i, k + 1))
        return [i]


def simplex_names(k: int) -> Tuple[str, ...]:
    return tuple(f"y{i}" for i in range(1, k + 1))


@dataclass(frozen=True)
class Simplex:
    """A map Δ^k → chart in the coordinates y_1, …, y_k."""

    dim: int
    map: SmoothMap
    vertex_ids: Tuple[int, ...] = field(default=(), compare=False)
    name: str = field(default="sigma", compare=False)

    def __post_init__(self):
        if self.dim < 0:
            raise IndexRangeError(f"Simplex dimension must be >= 0, got {self.dim}")
        if tuple(self.map.source) != simplex_names(self.dim):
            raise FamilyError(f"A {self.dim}-simplex is written in {simplex_names(self.dim)}, got {self.map.source}")
        if not self.vertex_ids:
            object.__setattr__(self, "vertex_ids", tuple(range(self.dim + 1)))

    @classmethod
    def parse(cls, chart: Chart, components: Sequence[str], dim: int, name: str = "sigma") -> "Simplex":
        return cls(dim, SmoothMap.parse(simplex_names(dim), chart, components), name=name)

    @property
    def chart(self) -> Chart:
        return self.map.target

    def restrict(self, vertices: Sequence[int]) -> "Simplex":
        """Precompose with the affine map [v_{j_0}, …, v_{j_m}] (indices increasing)."""
        vertices = list(vertices)
        if not vertices or any(not 0 <= v <= self.dim for v in vertices) or vertices != sorted(set(vertices)):
            raise IndexRangeError(f"Invalid vertex list {vertices} for a {self.dim}-simplex")
        m = len(vertices) - 1
        ys = [symbol(n) for n in simplex_names(m)]
        image = affine_point(vertices, self.dim, [*ys])
        substitution = {symbol(n): sympy.sympify(v) for n, v in zip(simplex_names(self.dim), image)}
        components = tuple(sympy.expand(c.xreplace(substitution)) for c in self.map.components)
        return Simplex(
            m, SmoothMap(simplex_names(m), self.chart, components),
            tuple(self.vertex_ids[v] for v in vertices), self.name,
        )

    def face(self, op: AffineOp) -> "Simplex":
        return self.restrict(op.vertices(self.dim))

    def at(self, y: Sequence[float]) -> np.ndarray:
        return self.map.compiled()(*y)

    def vertex_point(self, i: int) -> np.ndarray:
        return self.at([float(c) for c in vertex(self.dim, i)])

    def check_image(self) -> None:
        """Vertices and barycenter must land inside the chart bounds."""
        if self.chart.bounds is None:
            return
        for y in [vertex(self.dim, i) for i in range(self.dim + 1)] + [barycentric_center(self.dim)]:
            x = self.at([float(c) for c in y])
            if not self.chart.contains(x, slack=1e-9):
                raise FamilyError(f"Simplex {self.name!r} leaves the chart at y={tuple(map(str, y))}: {x}")


def face(sigma: Simplex, op: AffineOp) -> Simplex:
    return sigma.face(op)


def barycentric_center(k: int) -> Point:
    return tuple(Fraction(k + 1 - i, k + 1) for i in range(1, k + 1))


def barycenter(sigma: Simplex) -> np.ndarray:
    return sigma.at([float(c) for c in barycentric_center(sigma.dim)])


def affine_simplex(points: Sequence[Sequence[object]], chart: Chart, name: str = "alpha") -> Simplex:
    """σ(y) = P_0 + Σ_i y_i(P_i − P_{i−1}), sending v_i to P_i."""
    if not points:
        raise IndexRangeError("An affine simplex needs at least one point")
    k = len(points) - 1
    rows = [[sympy.sympify(c) for c in p] for p in points]
    if any(len(r) != chart.dim for r in rows):
        raise ShapeMismatchError(f"Points must have {chart.dim} coordinates")
    ys = [symbol(n) for n in simplex_names(k)]
    components = []
    for a in range(chart.dim):
        expr = rows[0][a]
        for i in range(1, k + 1):
            expr = expr + ys[i - 1] * (rows[i][a] - rows[i - 1][a])
        components.append(sympy.expand(expr))
    return Simplex(k, SmoothMap(simplex_names(k), chart, tuple(components)), name=name)


def reverse(sigma: Simplex) -> Simplex:
    """The 1-simplex traversed backwards (y_1 ↦ 1 − y_1)."""
    if sigma.dim != 1:
        raise IndexRangeError("Only 1-simplices can be reversed")
    y = symbol("y1")
    return Simplex(1, sigma.map.substitute("y1", 1 - y), tuple(reversed(sigma.vertex_ids)), f"{sigma.name}^-1")


def check_simplicial_identities(sigma: Simplex) -> bool:
    """∂_i∂_j = ∂_{j−1}∂_i for i < j, compared symbolically."""
    k = sigma.dim
    for j in range(k + 1):
        for i in range(j):
            left = sigma.face(AffineOp("face", j)).face(AffineOp("face", i))
            right = sigma.face(AffineOp("face", i)).face(AffineOp("face", j - 1))
            if left.vertex_ids != right.vertex_ids:
                return False
            for a, b in zip(left.map.components, right.map.components):
                if sympy.expand(a - b) != 0:
                    return False
    return True


# ── Contraction field of σ ∘ θ_(k) ──────────────────────

class SimplexFamilyField(ContractionField):
    """
    Family (w, t) ↦ σ(θ_w(t)) on I^{k−1} × I. The θ Jacobian is exact per
    linearity piece and composed with σ's symbolic Jacobian; breakpoints are
    the kinks of θ_w.
    """

    def __init__(self, sigma: Simplex, D: Superconnection):
        if sigma.chart.names != D.chart.names:
            raise ShapeMismatchError(f"Simplex {sigma.name!r} maps into a different chart")
        if sigma.dim < 1:
            raise IndexRangeError("The path family needs a simplex of dimension >= 1")
        self.sigma = sigma
        self.dims = D.dims
        self.k = sigma.dim - 1
        names = D.chart.names
        ys = [symbol(n) for n in simplex_names(sigma.dim)]
        jac = sympy.Matrix([[sympy.diff(c, y) for y in ys] for c in sigma.map.components])
        self._point = sigma.map.compiled()
        self._jac = sympy.lambdify(ys, jac, modules="numpy")
        self._a0 = CompiledForm(D.A(0), names, names)
        self._forms = [
            (p - 1, CompiledForm(D.forms[p], names, names))
            for p in range(1, min(D.m, sigma.dim) + 1) if p in D.forms
        ]

    def _theta(self, t: float, w: Sequence[float]) -> List[float]:
        return [float(c) for c in pi_k(lambda_path([min(max(x, 0.0), 1.0) for x in w], min(max(t, 0.0), 1.0)))]

    def point(self, t: float, w: Sequence[float]) -> np.ndarray:
        return self._point(*self._theta(t, w))

    def a0(self, t: float, w: Sequence[float]) -> GradedEndo:
        coeff = self._a0(*self.point(t, w)).terms.get(())
        return coeff if coeff is not None else GradedEndo.zero(self.dims, 1)

    def breakpoints(self, w: Sequence[float]) -> Tuple[float, ...]:
        return theta_kinks(w)

    def contraction(self, t: float, w: Sequence[float], max_degree: int, hint: Optional[float] = None) -> CubeForm:
        hint = t if hint is None else hint
        y = self._theta(t, w)
        x = self._point(*y)
        jacobian = np.asarray(self._jac(*y), dtype=float).reshape(len(x), self.k + 1) @ theta_jacobian(w, t, hint)
        n = self.dims.total
        terms: Dict[Tuple[int, ...], np.ndarray] = {}
        degrees: Dict[Tuple[int, ...], int] = {}
        for degree, fn in self._forms:
            if degree > max_degree:
                continue
            values = fn(*x)
            sign = -1.0 if degree % 2 else 1.0
            for I, coeff in values.terms.items():
                for S in itertools.combinations(range(self.k), degree):
                    columns = [0] + [a + 1 for a in S]
                    minor = float(np.linalg.det(jacobian[np.ix_(list(I), columns)]))
                    if minor == 0.0:
                        continue
                    value = (sign * minor) * coeff.matrix
                    terms[S] = terms[S] + value if S in terms else value
                    degrees[S] = coeff.degree
        return CubeForm(
            self.k, self.dims,
            {S: GradedEndo(self.dims, degrees[S], m, check=False) for S, m in terms.items()},
        )


# ── The cochain ψ and its identities ────────────────────

def orientation_sign(k: int) -> float:
    """(−1)^{(k−1)(k−2)/2}, the orientation of I^{k−1} that makes ψ a twisting cochain."""
    return -1.0 if ((k - 1) * (k - 2) // 2) % 2 else 1.0


def psi_simplex(sigma: Simplex, D: Superconnection, quad: QuadSpec,
                max_workers: Optional[int] = None) -> GradedEndo:
    """ψ_k(σ) = ±∫_{I^{k−1}} Ψ_{k−1}(1,0) along σ∘θ_(k); ψ_0(v) = A_0(v)."""
    if sigma.dim == 0:
        a0 = CompiledForm(D.A(0), D.chart.names, D.chart.names)(*sigma.at([])).terms.get(())
        return a0 if a0 is not None else GradedEndo.zero(D.dims, 1)
    field_ = SimplexFamilyField(sigma, D)
    value = integrate_psi(field_, D, quad, max_workers) * orientation_sign(sigma.dim)
    logger.debug("psi_%d(%s) computed, norm %.3g", sigma.dim, sigma.name, op_norm(value))
    return value


class PsiCache:
    """ψ of faces of one simplex, keyed by vertex list."""

    def __init__(self, sigma: Simplex, D: Superconnection, quad: QuadSpec, max_workers: Optional[int] = None):
        self.sigma = sigma
        self.D = D
        self.quad = quad
        self.max_workers = max_workers
        self._values: Dict[Tuple[int, ...], GradedEndo] = {}

    def __call__(self, vertices: Sequence[int]) -> GradedEndo:
        key = tuple(vertices)
        if key not in self._values:
            self._values[key] = psi_simplex(self.sigma.restrict(key), self.D, self.quad, self.max_workers)
        return self._values[key]


def cup_product(phi: Callable[[Simplex], GradedEndo], psi: Callable[[Simplex], GradedEndo],
                sigma: Simplex, p: int) -> GradedEndo:
    """(φ∪′ψ)(σ) = (−1)^{pq} φ(f_pσ)ψ(b_qσ), q = dim σ − p."""
    q = sigma.dim - p
    if q < 0 or p < 0:
        raise IndexRangeError(f"Cannot split a {sigma.dim}-simplex at {p}")
    sign = -1.0 if (p * q) % 2 else 1.0
    return compose(phi(sigma.face(AffineOp("front", p))), psi(sigma.face(AffineOp("back", q)))) * sign


def twisting_residual(sigma: Simplex, D: Superconnection, quad: QuadSpec,
                      max_workers: Optional[int] = None) -> float:
    """
    ‖Σ_{i=1}^{k−1}(−1)^i ψ_{k−1}(∂_iσ) − Σ_{i=0}^{k}(−1)^i ψ_i(f_iσ)ψ_{k−i}(b_{k−i}σ)‖.
    """
    k = sigma.dim
    if k < 1:
        raise IndexRangeError("twisting_residual needs a simplex of dimension >= 1")
    psi = PsiCache(sigma, D, quad, max_workers)
    lhs = GradedEndo.zero(D.dims, 2 - k)
    for i in range(1, k):
        lhs = lhs + psi(AffineOp("face", i).vertices(k)) * (-1.0) ** i
    rhs = GradedEndo.zero(D.dims, 2 - k)
    for i in range(0, k + 1):
        front = psi(AffineOp("front", i).vertices(k))
        back = psi(AffineOp("back", k - i).vertices(k))
        rhs = rhs + compose(front, back) * (-1.0) ** i
    return op_norm(lhs - rhs)


def ainfty_residual(barycenters: Sequence[Sequence[float]], D: Superconnection, quad: QuadSpec,
                    max_workers: Optional[int] = None) -> float:
    """
    With α the affine simplex through b(σ_0), …, b(σ_k), F_j = ψ_j on faces of α
    and d_i = A_0(b(σ_i)):

        d_0F_k + (−1)^kF_kd_k
          = Σ_{i=1}^{k−1}(−1)^iF_{k−1}(…σ̂_i…) − Σ_{i=1}^{k−1}(−1)^iF_i(σ_0..σ_i)F_{k−i}(σ_i..σ_k)
    """
    k = len(barycenters) - 1
    if k < 1:
        raise IndexRangeError("An A-infinity check needs a chain of at least two objects")
    alpha = affine_simplex([[float(c) for c in b] for b in barycenters], D.chart)
    alpha.check_image()
    F = PsiCache(alpha, D, quad, max_workers)
    d_first, d_last = F([0]), F([k])
    top = F(list(range(k + 1)))
    sign_k = -1.0 if k % 2 else 1.0
    lhs = compose(d_first, top) + compose(top, d_last) * sign_k
    rhs = GradedEndo.zero(D.dims, 2 - k)
    for i in range(1, k):
        rhs = rhs + F([v for v in range(k + 1) if v != i]) * (-1.0) ** i
        rhs = rhs - compose(F(list(range(i + 1))), F(list(range(i, k + 1)))) * (-1.0) ** i
    return op_norm(lhs - rhs)


def parse_simplex(chart: Chart, dim: int, components: Sequence[str], name: str = "sigma") -> Simplex:
    texts = [ScalarExpr.parse(c).tree for c in components]
    return Simplex(dim, SmoothMap(simplex_names(dim), chart, tuple(texts)), name=name)
