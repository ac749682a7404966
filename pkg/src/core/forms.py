"""
End(V)-valued differential forms.

EndForm     symbolic form on a chart, bigraded by (form degree p, endo degree e)
CubeForm    numeric exterior-algebra element over parameter axes w_1..w_k

Sign laws (stated once, everything else specializes them):
    (f⊗dx^I)(g⊗dx^J) = (−1)^{p·e_B} fg ⊗ dx^I∧dx^J
    d(f⊗dx^I)        = (−1)^e Σ_j ∂_j f ⊗ dx_j∧dx^I
Monomials are kept with strictly increasing indices; dt is moved to the last
slot by split_t.
"""

import itertools
from typing import TYPE_CHECKING, Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy

from ..exceptions import ChartMismatchError, EvaluationError, ShapeMismatchError, VariableClashError
from ..tasks import parallel_map
from .expr import Chart, ScalarExpr, symbol
from .graded import GradedDims, GradedEndo
from .quadrature import QuadSpec, tensor_rule

if TYPE_CHECKING:
    from .transport import SmoothMap

MultiIndex = Tuple[int, ...]


def merge_sign(first: Sequence[int], second: Sequence[int]) -> Tuple[int, Optional[MultiIndex]]:
    """Sign of sorting first+second (each increasing) and the merged index; None on repeats."""
    if set(first) & set(second):
        return 0, None
    inversions = sum(1 for a in first for b in second if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted((*first, *second)))


def _is_zero_matrix(m: sympy.ImmutableMatrix) -> bool:
    return all(entry == 0 for entry in m)


# ── EndForm ─────────────────────────────────────────────

class EndForm:
    """Symbolic End(V)-valued p-form of endo degree e on a chart."""

    __slots__ = ("chart", "dims", "p", "e", "coeffs")

    def __init__(
        self,
        chart: Chart,
        dims: GradedDims,
        p: int,
        e: int,
        coeffs: Mapping[MultiIndex, object],
        *,
        check: bool = True,
    ):
        self.chart = chart
        self.dims = dims
        self.p = int(p)
        self.e = int(e)
        cleaned: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
        mask = dims.mask(e)
        for index, matrix in coeffs.items():
            index = tuple(int(i) for i in index)
            matrix = sympy.ImmutableMatrix(matrix)
            if check:
                if len(index) != self.p or any(a >= b for a, b in zip(index, index[1:])):
                    raise ShapeMismatchError(f"Multi-index {index} is not increasing of length {self.p}")
                if index and (index[0] < 0 or index[-1] >= chart.dim):
                    raise ShapeMismatchError(f"Multi-index {index} outside a {chart.dim}-dimensional chart")
                if matrix.shape != (dims.total, dims.total):
                    raise ShapeMismatchError(f"Coefficient must be {dims.total}x{dims.total}, got {matrix.shape}")
                for r in range(dims.total):
                    for c in range(dims.total):
                        if not mask[r, c] and matrix[r, c] != 0:
                            raise ShapeMismatchError(
                                f"Entry ({r}, {c}) lies outside the degree-{e} blocks"
                            )
            if not _is_zero_matrix(matrix):
                cleaned[index] = matrix
        self.coeffs = cleaned

    @classmethod
    def zero(cls, chart: Chart, dims: GradedDims, p: int, e: int) -> "EndForm":
        return cls(chart, dims, p, e, {}, check=False)

    @classmethod
    def scalar(cls, chart: Chart, dims: GradedDims, value=1) -> "EndForm":
        """value ⊗ identity as a 0-form of degree 0."""
        return cls(chart, dims, 0, 0, {(): sympy.eye(dims.total) * sympy.sympify(value)}, check=False)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def entry(self, index: MultiIndex, row: int, col: int) -> ScalarExpr:
        matrix = self.coeffs.get(tuple(index))
        return ScalarExpr(sympy.S.Zero if matrix is None else matrix[row, col])

    def monomial_names(self, index: MultiIndex) -> Tuple[str, ...]:
        return tuple(self.chart.names[i] for i in index)

    def _compatible(self, other: "EndForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError(f"{self.chart.names} vs {other.chart.names}")
        if self.dims != other.dims:
            raise ShapeMismatchError(f"{self.dims} vs {other.dims}")

    def __add__(self, other: "EndForm") -> "EndForm":
        self._compatible(other)
        if (self.p, self.e) != (other.p, other.e):
            raise ShapeMismatchError(f"Cannot add bidegrees {(self.p, self.e)} and {(other.p, other.e)}")
        coeffs = dict(self.coeffs)
        for index, matrix in other.coeffs.items():
            coeffs[index] = coeffs[index] + matrix if index in coeffs else matrix
        return EndForm(self.chart, self.dims, self.p, self.e, coeffs, check=False)

    def __neg__(self) -> "EndForm":
        return EndForm(self.chart, self.dims, self.p, self.e, {i: -m for i, m in self.coeffs.items()}, check=False)

    def __sub__(self, other: "EndForm") -> "EndForm":
        return self + (-other)

    def scaled(self, value) -> "EndForm":
        value = sympy.sympify(value)
        return EndForm(self.chart, self.dims, self.p, self.e, {i: m * value for i, m in self.coeffs.items()}, check=False)

    def partial(self, var: str) -> "EndForm":
        """Entrywise ∂/∂var of every coefficient."""
        s = symbol(var)
        return EndForm(
            self.chart, self.dims, self.p, self.e,
            {i: m.diff(s) for i, m in self.coeffs.items()},
            check=False,
        )

    def __repr__(self) -> str:
        monomials = ", ".join("∧".join(f"d{n}" for n in self.monomial_names(i)) or "1" for i in self.coeffs)
        return f"EndForm(p={self.p}, e={self.e}, [{monomials}])"


def wedge(A: EndForm, B: EndForm) -> EndForm:
    """Graded product with coefficient sign (−1)^{p_A·e_B}."""
    A._compatible(B)
    crossing = -1 if (A.p * B.e) % 2 else 1
    coeffs: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
    for I, f in A.coeffs.items():
        for J, g in B.coeffs.items():
            sign, merged = merge_sign(I, J)
            if merged is None:
                continue
            term = (f * g) * (sign * crossing)
            coeffs[merged] = coeffs[merged] + term if merged in coeffs else term
    return EndForm(A.chart, A.dims, A.p + B.p, A.e + B.e, coeffs, check=False)


def ext_d(A: EndForm, exclude: Iterable[str] = ()) -> EndForm:
    """
    Exterior derivative (−1)^e Σ_j ∂_j f ⊗ dx_j∧dx^I.

    Coordinates named in `exclude` are held fixed (a partial exterior
    derivative, e.g. in the parameter directions only).
    """
    skip = {A.chart.index(name) for name in exclude}
    parity = -1 if A.e % 2 else 1
    coeffs: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
    for I, f in A.coeffs.items():
        for j, var in enumerate(A.chart.symbols):
            if j in I or j in skip:
                continue
            derivative = f.diff(var)
            if _is_zero_matrix(derivative):
                continue
            sign, merged = merge_sign((j,), I)
            term = derivative * (sign * parity)
            coeffs[merged] = coeffs[merged] + term if merged in coeffs else term
    return EndForm(A.chart, A.dims, A.p + 1, A.e, coeffs, check=False)


def pullback(A: EndForm, h: "SmoothMap") -> EndForm:
    """Substitute x_i ↦ h_i and dx_i ↦ Σ_a ∂h_i/∂u_a du_a; symbolic throughout."""
    if h.target.names != A.chart.names:
        raise ChartMismatchError(f"Map lands in {h.target.names}, form lives on {A.chart.names}")
    source = Chart(h.source)
    allowed = set(source.symbols)
    for comp in h.components:
        stray = comp.free_symbols - allowed
        if stray:
            raise VariableClashError(
                f"Component {comp} uses {sorted(s.name for s in stray)} outside {h.source}"
            )
    substitution = dict(zip(A.chart.symbols, h.components))
    jac = sympy.Matrix([[sympy.diff(c, u) for u in source.symbols] for c in h.components])
    subsets = _subsets(source.dim, A.p)
    coeffs: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
    for I, f in A.coeffs.items():
        substituted = f.xreplace(substitution)
        for S in subsets:
            minor = sympy.expand(jac.extract(list(I), list(S)).det()) if I else sympy.S.One
            if minor == 0:
                continue
            term = substituted * minor
            coeffs[S] = coeffs[S] + term if S in coeffs else term
    return EndForm(source, A.dims, A.p, A.e, coeffs, check=False)


def _subsets(m: int, p: int) -> Tuple[MultiIndex, ...]:
    return tuple(itertools.combinations(range(m), p))


def split_t(A: EndForm, axis: str = "t") -> Tuple[EndForm, EndForm]:
    """A = (A/t)∧dt + A^⊥ with dt moved to the last slot."""
    ti = A.chart.index(axis)
    over: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
    perp: Dict[MultiIndex, sympy.ImmutableMatrix] = {}
    for I, f in A.coeffs.items():
        if ti in I:
            after = sum(1 for i in I if i > ti)
            over[tuple(i for i in I if i != ti)] = f * (-1 if after % 2 else 1)
        else:
            perp[I] = f
    return (
        EndForm(A.chart, A.dims, A.p - 1, A.e, over, check=False),
        EndForm(A.chart, A.dims, A.p, A.e, perp, check=False),
    )


# ── CubeForm ────────────────────────────────────────────

class CubeForm:
    """Numeric form over parameter axes 0..k-1 with GradedEndo coefficients."""

    __slots__ = ("axes", "dims", "terms")

    def __init__(self, axes: int, dims: GradedDims, terms: Optional[Mapping[MultiIndex, GradedEndo]] = None):
        self.axes = int(axes)
        self.dims = dims
        self.terms: Dict[MultiIndex, GradedEndo] = {}
        for S, coeff in (terms or {}).items():
            S = tuple(S)
            if any(a >= b for a, b in zip(S, S[1:])) or (S and (S[0] < 0 or S[-1] >= self.axes)):
                raise ShapeMismatchError(f"Axis subset {S} invalid for {self.axes} axes")
            if coeff.dims != dims:
                raise ShapeMismatchError(f"Coefficient on {coeff.dims}, form on {dims}")
            self.terms[S] = coeff

    @classmethod
    def constant(cls, axes: int, coeff: GradedEndo) -> "CubeForm":
        return cls(axes, coeff.dims, {(): coeff})

    @classmethod
    def identity(cls, axes: int, dims: GradedDims) -> "CubeForm":
        return cls.constant(axes, GradedEndo.identity(dims))

    @property
    def endo_degree(self) -> Optional[int]:
        """The common endo degree, or None for mixed or empty forms."""
        degrees = {coeff.degree for coeff in self.terms.values()}
        return degrees.pop() if len(degrees) == 1 else None

    def component(self, p: int) -> "CubeForm":
        """The form-degree p part."""
        return CubeForm(self.axes, self.dims, {S: c for S, c in self.terms.items() if len(S) == p})

    def top(self) -> Optional[GradedEndo]:
        return self.terms.get(tuple(range(self.axes)))

    def coefficient(self, S: Sequence[int]) -> Optional[GradedEndo]:
        return self.terms.get(tuple(S))

    def norm(self) -> float:
        from .graded import op_norm

        return max((op_norm(c) for c in self.terms.values()), default=0.0)

    def __add__(self, other: "CubeForm") -> "CubeForm":
        if other.axes != self.axes or other.dims != self.dims:
            raise ShapeMismatchError("CubeForms on different axes or spaces")
        terms = dict(self.terms)
        for S, coeff in other.terms.items():
            terms[S] = terms[S] + coeff if S in terms else coeff
        return CubeForm(self.axes, self.dims, terms)

    def __neg__(self) -> "CubeForm":
        return CubeForm(self.axes, self.dims, {S: -c for S, c in self.terms.items()})

    def __sub__(self, other: "CubeForm") -> "CubeForm":
        return self + (-other)

    def __mul__(self, scalar: float) -> "CubeForm":
        return CubeForm(self.axes, self.dims, {S: c * scalar for S, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"CubeForm(axes={self.axes}, subsets={sorted(self.terms)}, norm={self.norm():.3g})"


def cube_wedge(a: CubeForm, b: CubeForm, max_degree: Optional[int] = None) -> CubeForm:
    """Subset merge with permutation sign × (−1)^{|S_a|·e_b}; repeated axes vanish."""
    if a.axes != b.axes or a.dims != b.dims:
        raise ShapeMismatchError("cube_wedge needs matching axes and graded spaces")
    matrices: Dict[MultiIndex, np.ndarray] = {}
    degrees: Dict[MultiIndex, int] = {}
    for Sa, f in a.terms.items():
        for Sb, g in b.terms.items():
            if max_degree is not None and len(Sa) + len(Sb) > max_degree:
                continue
            sign, merged = merge_sign(Sa, Sb)
            if merged is None:
                continue
            if (len(Sa) * g.degree) % 2:
                sign = -sign
            product = f.matrix @ g.matrix
            if merged in matrices:
                if degrees[merged] != f.degree + g.degree:
                    raise ShapeMismatchError(f"Mixed endo degrees on subset {merged}")
                matrices[merged] = matrices[merged] + sign * product
            else:
                matrices[merged] = sign * product
                degrees[merged] = f.degree + g.degree
    return CubeForm(
        a.axes, a.dims,
        {S: GradedEndo(a.dims, degrees[S], m, check=False) for S, m in matrices.items()},
    )


# ── Numeric evaluation ──────────────────────────────────

class CompiledForm:
    """
    EndForm compiled to numpy callables, evaluated into CubeForms.

    `args` fixes the positional argument order; `axes` lists the chart
    coordinates that become CubeForm axes (in that order).
    """

    def __init__(self, A: EndForm, args: Sequence[str], axes: Sequence[str]):
        self.dims = A.dims
        self.degree = A.e
        self.args = tuple(args)
        self.n_axes = len(axes)
        position = {name: i for i, name in enumerate(axes)}
        arg_symbols = [symbol(name) for name in self.args]
        self._terms = []
        for I, matrix in A.coeffs.items():
            names = A.monomial_names(I)
            if any(name not in position for name in names):
                raise ShapeMismatchError(f"Monomial d{names} involves a coordinate that is not an axis")
            S = tuple(sorted(position[n] for n in names))
            # Axis order may differ from chart order.
            order = [position[n] for n in names]
            inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
            fn = sympy.lambdify(arg_symbols, matrix, modules="numpy")
            self._terms.append((S, -1.0 if inversions % 2 else 1.0, fn))

    def __call__(self, *values: float) -> CubeForm:
        total = self.dims.total
        terms: Dict[MultiIndex, np.ndarray] = {}
        for S, sign, fn in self._terms:
            with np.errstate(all="ignore"):
                value = np.asarray(fn(*values), dtype=float).reshape(total, total)
            if not np.all(np.isfinite(value)):
                raise EvaluationError(f"Non-finite coefficient at {dict(zip(self.args, values))}")
            terms[S] = terms[S] + sign * value if S in terms else sign * value
        return CubeForm(
            self.n_axes, self.dims,
            {S: GradedEndo(self.dims, self.degree, m, check=False) for S, m in terms.items()},
        )


def eval_cubeform(A: EndForm, point: Mapping[str, float], axes: Optional[Sequence[str]] = None) -> CubeForm:
    """Entrywise evaluation of a form with no dt at a point of its chart."""
    axes = tuple(axes) if axes is not None else tuple(n for n in A.chart.names if n != "t")
    args = A.chart.names
    missing = [name for name in args if name not in point]
    if missing:
        from ..exceptions import UnboundVariableError

        raise UnboundVariableError(f"Unbound variable(s): {', '.join(missing)}")
    return CompiledForm(A, args, axes)(*(float(point[name]) for name in args))


def fiber_integrate(
    field: Callable[[Tuple[float, ...]], CubeForm],
    k: int,
    quad: QuadSpec,
    degree: Optional[int] = None,
    dims: Optional[GradedDims] = None,
    max_workers: Optional[int] = None,
) -> GradedEndo:
    """
    ∫_{I^k} of the top coefficient of `field` by tensor Gauss-Legendre.

    Nodes may be evaluated concurrently; accumulation follows ascending node
    index. `degree`/`dims` type the result when every node is zero.
    """
    rule = tensor_rule(k, quad)
    values = parallel_map(field, [point for point, _ in rule], max_workers)
    total: Optional[np.ndarray] = None
    for (point, weight), form in zip(rule, values):
        coeff = form.top()
        if coeff is None:
            dims = dims or form.dims
            continue
        dims, degree = coeff.dims, coeff.degree
        total = weight * coeff.matrix if total is None else total + weight * coeff.matrix
    if dims is None:
        raise ShapeMismatchError("Cannot type an integral with no nodes")
    degree = -k if degree is None else degree
    if total is None:
        return GradedEndo.zero(dims, degree)
    return GradedEndo(dims, degree, total, check=False)
