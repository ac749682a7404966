"""Tests for superconnections, curvature and gauge transformations."""

import pytest
import sympy

from src.core.expr import Chart, symbol
from src.core.forms import EndForm
from src.core.graded import GradedDims
from src.config import settings
from src.core.superconn import (
    Superconnection,
    const_superconnection,
    curvature,
    flatness_residuals,
    gauge_transform,
    is_flat,
    sample_grid,
)
from src.exceptions import InverseCheckError, ShapeMismatchError


class TestConstruction:
    def test_degree_check(self, chart2, dims_line):
        wrong = EndForm(chart2, dims_line, 1, 1, {}, check=False)
        with pytest.raises(ShapeMismatchError):
            Superconnection(chart2, dims_line, {1: wrong})

    def test_absent_forms_are_zero(self, trivial_D):
        assert trivial_D.A(2).is_zero
        assert trivial_D.A(0).e == 1

    def test_curvature_degrees(self, trivial_D):
        F = curvature(trivial_D)
        assert sorted(F) == [-1, 0, 1, 2, 3]
        assert all(F[q].p == q + 1 and F[q].e == 1 - q for q in F)


class TestFlatness:
    def test_trivial_is_flat(self, trivial_D):
        report = flatness_residuals(trivial_D, max_workers=1)
        assert report.overall == 0.0
        assert report.grid_size == 100

    def test_nonflat_witness(self, witness_D):
        report = flatness_residuals(witness_D, max_workers=1)
        assert report.residuals[1] == pytest.approx(1.0, abs=1e-9)
        assert report.residuals[0] == 0.0
        assert not is_flat(witness_D)

    def test_constant_example_is_flat(self, constant_A2_D):
        assert flatness_residuals(constant_A2_D, max_workers=1).overall == 0.0

    def test_nilpotency_failure(self, chart2):
        dims = GradedDims.of({0: 1, 1: 1, 2: 1})
        a0 = EndForm(chart2, dims, 0, 1, {(): sympy.Matrix([[0, 0, 0], [1, 0, 0], [0, 1, 0]])})
        D = Superconnection(chart2, dims, {0: a0})
        assert flatness_residuals(D, max_workers=1).residuals[-1] == pytest.approx(1.0)

    def test_grid_shrinks_in_high_dimension(self):
        assert len(sample_grid(Chart.standard(2))) == 100
        assert len(sample_grid(Chart.standard(6))) <= 1000

    def test_default_tolerance_follows_settings(self, chart2, dims_line, monkeypatch):
        a1 = EndForm(chart2, dims_line, 1, 0, {(0,): [[sympy.Rational(1, 10**11) * symbol("x2")]]})
        D = Superconnection(chart2, dims_line, {1: a1})
        assert is_flat(D)
        monkeypatch.setattr(settings, "tol_exact", 1e-12)
        assert not is_flat(D)

    def test_three_coordinate_example_is_flat(self, volume_workspace):
        report = flatness_residuals(volume_workspace.D, max_workers=1)
        assert report.overall < 1e-12
        assert volume_workspace.D.A(3).coeffs


class TestConstantBuilder:
    def test_point_data_needs_no_chart(self, dims_line):
        D = const_superconnection(dims_line, {0: {(): [[0]]}})
        assert D.chart.names == ("x1", "x2")

    def test_forms_need_a_chart(self, dims_line):
        with pytest.raises(ShapeMismatchError):
            const_superconnection(dims_line, {3: {("x1", "x2", "x3"): [[0]]}})

    def test_coordinates_follow_chart(self, chart2, dims_line):
        D = const_superconnection(dims_line, {1: {("x2",): [[1]]}}, chart2)
        assert D.A(1).coeffs[(1,)] == sympy.Matrix([[1]])


class TestGauge:
    def test_flat_stays_flat(self, flat_D):
        assert flatness_residuals(flat_D, max_workers=1).overall < 1e-10

    def test_gauge_makes_connection_nontrivial(self, flat_D):
        assert not flat_D.A(1).is_zero

    def test_pure_gauge_of_trivial(self, chart2, dims_line):
        g = EndForm(chart2, dims_line, 0, 0, {(): [[sympy.exp(symbol("x1") * symbol("x2"))]]})
        g_inv = EndForm(chart2, dims_line, 0, 0, {(): [[sympy.exp(-symbol("x1") * symbol("x2"))]]})
        D = gauge_transform(Superconnection.trivial(chart2, dims_line), g, g_inv)
        # A_1 = −g⁻¹dg = −(x2 dx1 + x1 dx2)
        assert sympy.simplify(D.A(1).coeffs[(0,)][0, 0] + symbol("x2")) == 0
        assert flatness_residuals(D, max_workers=1).overall < 1e-12

    def test_bad_inverse(self, chart2, dims_line):
        g = EndForm(chart2, dims_line, 0, 0, {(): [[2]]})
        with pytest.raises(InverseCheckError):
            gauge_transform(Superconnection.trivial(chart2, dims_line), g, g)
