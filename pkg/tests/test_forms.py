"""Tests for End(V)-valued forms: signs, d, pullback, splitting and cube integration."""

import itertools

import numpy as np
import pytest
import sympy

from src.core.expr import Chart, symbol
from src.core.forms import (
    CompiledForm,
    CubeForm,
    EndForm,
    cube_wedge,
    eval_cubeform,
    ext_d,
    fiber_integrate,
    pullback,
    split_t,
    wedge,
)
from src.core.graded import GradedDims, GradedEndo
from src.core.quadrature import QuadSpec
from src.core.transport import SmoothMap
from src.exceptions import ChartMismatchError, ShapeMismatchError

x1, x2 = symbol("x1"), symbol("x2")


@pytest.fixture()
def scalar():
    return GradedDims.of({0: 1})


@pytest.fixture()
def odd():
    return GradedDims.of({0: 1, 1: 1})


def up(chart, dims, p, index, value=1):
    """value ⊗ (V^0 → V^1) as a p-form."""
    return EndForm(chart, dims, p, 1, {index: sympy.Matrix([[0, 0], [value, 0]])})


class TestWedge:
    def test_crossing_sign(self, chart2, odd):
        a = up(chart2, odd, 1, (0,))
        b = EndForm(chart2, odd, 0, -1, {(): sympy.Matrix([[0, 1], [0, 0]])})
        # (−1)^{p_A e_B} = −1 for a 1-form past an odd endomorphism
        product = wedge(a, b)
        assert product.p == 1 and product.e == 0
        assert product.coeffs[(0,)] == sympy.Matrix([[0, 0], [0, -1]])

    def test_repeated_differential_vanishes(self, chart2, scalar):
        a = EndForm(chart2, scalar, 1, 0, {(0,): [[x2]]})
        assert wedge(a, a).is_zero

    def test_antisymmetry_of_monomials(self, chart2, scalar):
        a = EndForm(chart2, scalar, 1, 0, {(0,): [[1]]})
        b = EndForm(chart2, scalar, 1, 0, {(1,): [[1]]})
        assert (wedge(a, b) + wedge(b, a)).is_zero

    def test_chart_mismatch(self, chart2, scalar):
        other = Chart(("x1", "x3"))
        with pytest.raises(ChartMismatchError):
            wedge(EndForm.scalar(chart2, scalar), EndForm.scalar(other, scalar))


class TestExteriorDerivative:
    def test_function(self, chart2, scalar):
        f = EndForm(chart2, scalar, 0, 0, {(): [[x1 * x2]]})
        df = ext_d(f)
        assert df.coeffs[(0,)] == sympy.Matrix([[x2]])
        assert df.coeffs[(1,)] == sympy.Matrix([[x1]])

    def test_one_form(self, chart2, scalar):
        a = EndForm(chart2, scalar, 1, 0, {(0,): [[x2]]})
        # d(x2 dx1) = dx2∧dx1 = −dx1∧dx2
        assert ext_d(a).coeffs[(0, 1)] == sympy.Matrix([[-1]])

    def test_odd_parity(self, chart2, odd):
        f = up(chart2, odd, 0, (), x1)
        assert ext_d(f).coeffs[(0,)] == sympy.Matrix([[0, 0], [-1, 0]])

    def test_d_squared(self, chart2, scalar):
        f = EndForm(chart2, scalar, 0, 0, {(): [[sympy.sin(x1) * sympy.exp(x2)]]})
        assert ext_d(ext_d(f)).is_zero

    def test_exclude(self, chart2, scalar):
        f = EndForm(chart2, scalar, 0, 0, {(): [[x1 * x2]]})
        assert set(ext_d(f, exclude=("x1",)).coeffs) == {(1,)}


class TestPullback:
    def test_one_form(self, chart2, scalar):
        a = EndForm(chart2, scalar, 1, 0, {(0,): [[1]]})
        t, w = symbol("t"), symbol("w1")
        h = SmoothMap(("t", "w1"), chart2, (t * w, t))
        pulled = pullback(a, h)
        assert pulled.chart.names == ("t", "w1")
        assert pulled.coeffs[(0,)] == sympy.Matrix([[w]])
        assert pulled.coeffs[(1,)] == sympy.Matrix([[t]])

    def test_area_form_jacobian(self, chart2, scalar):
        area = EndForm(chart2, scalar, 2, 0, {(0, 1): [[1]]})
        t, w = symbol("t"), symbol("w1")
        h = SmoothMap(("t", "w1"), chart2, (2 * t, 3 * w))
        assert pullback(area, h).coeffs[(0, 1)] == sympy.Matrix([[6]])

    def test_wrong_target(self, chart2, scalar):
        a = EndForm(chart2, scalar, 1, 0, {(0,): [[1]]})
        h = SmoothMap(("t",), Chart(("x1", "x3")), (symbol("t"), symbol("t")))
        with pytest.raises(ChartMismatchError):
            pullback(a, h)


class TestSplit:
    def test_dt_moved_last(self, scalar):
        chart = Chart(("t", "w1"))
        a = EndForm(chart, scalar, 2, 0, {(0, 1): [[5]]})
        over, perp = split_t(a)
        # dt∧dw1 = −dw1∧dt
        assert over.coeffs[(1,)] == sympy.Matrix([[-5]])
        assert perp.is_zero

    def test_no_dt(self, scalar):
        chart = Chart(("t", "w1"))
        a = EndForm(chart, scalar, 1, 0, {(1,): [[2]]})
        over, perp = split_t(a)
        assert over.is_zero
        assert perp.coeffs[(1,)] == sympy.Matrix([[2]])


class TestCubeForm:
    def test_koszul_sign(self, odd):
        x = GradedEndo.identity(odd)
        y = GradedEndo.from_blocks(odd, 1, {0: [[2.0]]})
        a = CubeForm(1, odd, {(0,): x})
        b = CubeForm.constant(1, y)
        product = cube_wedge(a, b)
        assert np.allclose(product.coefficient((0,)).matrix, -y.matrix)

    def test_permutation_sign(self, scalar):
        one = GradedEndo.identity(scalar)
        a = CubeForm(2, scalar, {(1,): one})
        b = CubeForm(2, scalar, {(0,): one})
        assert np.allclose(cube_wedge(a, b).top().matrix, [[-1.0]])

    def test_max_degree(self, scalar):
        one = GradedEndo.identity(scalar)
        a = CubeForm(2, scalar, {(0,): one})
        b = CubeForm(2, scalar, {(1,): one})
        assert not cube_wedge(a, b, max_degree=1).terms

    def test_invalid_subset(self, scalar):
        with pytest.raises(ShapeMismatchError):
            CubeForm(1, scalar, {(0, 1): GradedEndo.identity(scalar)})

    def test_component(self, scalar):
        one = GradedEndo.identity(scalar)
        form = CubeForm(2, scalar, {(): one, (0,): one, (0, 1): one})
        assert set(form.component(1).terms) == {(0,)}


class TestEvaluation:
    def test_compiled_axis_order(self, scalar):
        chart = Chart(("w1", "w2"))
        area = EndForm(chart, scalar, 2, 0, {(0, 1): [[symbol("w1")]]})
        # Axes listed in reverse chart order flip the monomial.
        value = CompiledForm(area, ("w1", "w2"), ("w2", "w1"))(3.0, 0.0)
        assert np.allclose(value.top().matrix, [[-3.0]])

    def test_eval_cubeform(self, scalar):
        chart = Chart(("t", "w1"))
        a = EndForm(chart, scalar, 1, 0, {(1,): [[symbol("t") * symbol("w1")]]})
        form = eval_cubeform(a, {"t": 2.0, "w1": 0.5})
        assert np.allclose(form.coefficient((0,)).matrix, [[1.0]])

    def test_fiber_integrate(self, scalar):
        def field(w):
            return CubeForm(2, scalar, {(0, 1): GradedEndo(scalar, 0, [[w[0] * w[1]]])})

        value = fiber_integrate(field, 2, QuadSpec(10, 4), max_workers=1)
        assert value.matrix[0, 0] == pytest.approx(0.25, abs=1e-14)

    def test_fiber_integrate_zero(self, scalar):
        value = fiber_integrate(lambda w: CubeForm(1, scalar), 1, QuadSpec(10, 2), degree=-1, dims=scalar)
        assert value.degree == -1 and not value.matrix.any()


def poly_form(chart, dims, p, e, seed=0):
    """Polynomial coefficients on every allowed block entry of every monomial."""
    s = chart.symbols
    mask = dims.mask(e)
    coeffs = {}
    for n, index in enumerate(itertools.combinations(range(chart.dim), p)):
        matrix = sympy.zeros(dims.total)
        for r in range(dims.total):
            for c in range(dims.total):
                if mask[r, c]:
                    k = seed + n + 2 * r + 3 * c
                    matrix[r, c] = (k % 3 + 1) * s[0] * s[1] ** (k % 2) + (k % 4 - 1) * s[2] ** 2 * s[0] ** 2 + k
        coeffs[index] = matrix
    return EndForm(chart, dims, p, e, coeffs)


def same(a, b):
    return all(sympy.expand(v) == 0 for m in (a - b).coeffs.values() for v in m)


@pytest.fixture()
def cube3():
    return Chart(("t", "w1", "w2"))


class TestContractionIdentities:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_derivative_of_contraction(self, cube3, odd, p):
        # d(A/t) = ∂_t A^⊥ + (dA)/t for total degree one
        A = poly_form(cube3, odd, p, 1 - p, seed=p)
        over, perp = split_t(A)
        lhs = ext_d(over, exclude=("t",))
        rhs = perp.partial("t") + split_t(ext_d(A))[0]
        assert same(lhs, rhs)

    @pytest.mark.parametrize("pa,pb", [(1, 1), (1, 2), (2, 1), (0, 2), (2, 0)])
    def test_contraction_of_product(self, cube3, odd, pa, pb):
        # (AB)/t = A^⊥(B/t) − (A/t)B^⊥
        A = poly_form(cube3, odd, pa, 1 - pa, seed=1)
        B = poly_form(cube3, odd, pb, 1 - pb, seed=4)
        a_over, a_perp = split_t(A)
        b_over, b_perp = split_t(B)
        lhs = split_t(wedge(A, B))[0]
        assert same(lhs, wedge(a_perp, b_over) - wedge(a_over, b_perp))

    @pytest.mark.parametrize("pa,ea,pb,eb", [(1, 0, 1, 1), (0, 1, 2, -1), (1, -1, 1, 0), (2, 1, 0, 1)])
    def test_graded_leibniz(self, cube3, odd, pa, ea, pb, eb):
        A = poly_form(cube3, odd, pa, ea, seed=2)
        B = poly_form(cube3, odd, pb, eb, seed=5)
        sign = -1 if (pa + ea) % 2 else 1
        rhs = wedge(ext_d(A), B) + wedge(A, ext_d(B)).scaled(sign)
        assert same(ext_d(wedge(A, B)), rhs)
