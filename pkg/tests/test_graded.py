"""Tests for graded dimensions and graded endomorphisms."""

import math
import random

import numpy as np
import pytest

from src.core.graded import GradedDims, GradedEndo, compose, op_norm, super_commutator
from src.exceptions import DimensionMismatchError, ShapeMismatchError


@pytest.fixture()
def dims():
    return GradedDims.of({0: 1, 1: 1})


class TestGradedDims:
    def test_offsets_follow_degree_order(self):
        d = GradedDims.of({2: 1, -1: 2, 0: 3})
        assert d.degrees == (-1, 0, 2)
        assert d.total == 6
        assert d.slice(0) == slice(2, 5)
        assert d.degree_of_index(5) == 2

    def test_zero_dims_dropped(self):
        assert GradedDims.of({0: 1, 1: 0}) == GradedDims.of({0: 1})

    def test_negative_rejected(self):
        with pytest.raises(ShapeMismatchError):
            GradedDims.of({0: -1})

    def test_mask(self, dims):
        assert dims.mask(1).tolist() == [[False, False], [True, False]]


class TestGradedEndo:
    def test_block_check(self, dims):
        with pytest.raises(ShapeMismatchError):
            GradedEndo(dims, 1, np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_from_blocks(self, dims):
        f = GradedEndo.from_blocks(dims, 1, {0: [[2.0]]})
        assert f.matrix.tolist() == [[0.0, 0.0], [2.0, 0.0]]
        assert f.block(0).tolist() == [[2.0]]

    def test_from_blocks_shape(self, dims):
        with pytest.raises(ShapeMismatchError):
            GradedEndo.from_blocks(dims, 0, {0: [[1.0, 2.0]]})

    def test_add_requires_same_degree(self, dims):
        with pytest.raises(DimensionMismatchError):
            GradedEndo.identity(dims) + GradedEndo.zero(dims, 1)

    def test_compose_adds_degrees(self, dims):
        up = GradedEndo.from_blocks(dims, 1, {0: [[2.0]]})
        down = GradedEndo.from_blocks(dims, -1, {1: [[3.0]]})
        product = compose(down, up)
        assert product.degree == 0
        assert product.block(0).tolist() == [[6.0]]

    def test_compose_other_space(self, dims):
        with pytest.raises(DimensionMismatchError):
            compose(GradedEndo.identity(dims), GradedEndo.identity(GradedDims.of({0: 2})))


class TestSuperCommutator:
    def test_odd_odd_anticommutes(self, dims):
        a = GradedEndo.from_blocks(dims, 1, {0: [[1.0]]})
        b = GradedEndo.from_blocks(dims, -1, {1: [[1.0]]})
        # [a, b] = ab + ba = identity
        assert super_commutator(a, b).allclose(GradedEndo.identity(dims))

    def test_even_commutator(self, dims):
        a = GradedEndo(dims, 0, np.diag([1.0, 2.0]))
        assert op_norm(super_commutator(a, a)) == 0.0


class TestNorm:
    def test_frobenius(self, dims):
        assert op_norm(GradedEndo.identity(dims)) == pytest.approx(math.sqrt(2.0))


def random_endo(rng, dims, degree):
    """Small-integer entries on the blocks of the given degree."""
    values = np.array([[rng.randint(-3, 3) for _ in range(dims.total)] for _ in range(dims.total)], dtype=float)
    return GradedEndo(dims, degree, values * dims.mask(degree))


@pytest.fixture()
def wide():
    return GradedDims.of({-1: 1, 0: 2, 1: 1})


class TestAlgebraProperties:
    @pytest.mark.parametrize("seed", range(10))
    def test_compose_associative(self, wide, seed):
        rng = random.Random(seed)
        f, g, h = (random_endo(rng, wide, rng.randint(-2, 2)) for _ in range(3))
        left = compose(compose(f, g), h)
        right = compose(f, compose(g, h))
        assert left.degree == right.degree
        assert np.array_equal(left.matrix, right.matrix)

    @pytest.mark.parametrize("seed", range(10))
    def test_commutator_graded_antisymmetric(self, wide, seed):
        rng = random.Random(50 + seed)
        a, b = (random_endo(rng, wide, rng.randint(-2, 2)) for _ in range(2))
        sign = -1.0 if (a.degree * b.degree) % 2 else 1.0
        assert np.array_equal(super_commutator(a, b).matrix, (super_commutator(b, a) * -sign).matrix)
