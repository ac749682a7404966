"""Tests for bar words, the cobar differential and ψ_* on words."""

import random

import pytest

from src.core.cobar import (
    BarWord,
    FormalSum,
    Letter,
    bar_d,
    check_d_squared,
    compose_sums,
    compose_words,
    d_sum,
    dg_functor_residual,
    letter_d,
    random_word,
)
from src.core.graded import GradedDims
from src.core.quadrature import QuadSpec
from src.core.simplex import affine_simplex
from src.core.superconn import const_superconnection
from src.exceptions import IncompatibleWordsError, IndexRangeError, ShapeMismatchError


def simplex_letter(base, dim, start="a", end="b"):
    tags = [start] + [f"{base}.{i}" for i in range(1, dim)] + [end]
    return Letter.simplex(base, dim, tags)


class TestLetters:
    def test_faces_keep_tags(self):
        letter = simplex_letter("s", 2)
        assert letter.face(1).tags == ("a", "b")
        assert letter.front(1).vertices == (0, 1)
        assert letter.back(1).vertices == (1, 2)
        assert letter.degree == 1

    def test_vertices_increase(self):
        with pytest.raises(IndexRangeError):
            Letter("s", (1, 0), ("a", "b"))

    def test_tag_count(self):
        with pytest.raises(ShapeMismatchError):
            Letter("s", (0, 1), ("a",))

    def test_points_are_not_letters(self):
        with pytest.raises(IndexRangeError):
            Letter("s", (0,), ("a",))


class TestDifferential:
    def test_edge_is_closed(self):
        assert letter_d(simplex_letter("s", 1)) == {}

    def test_triangle(self):
        s = simplex_letter("s", 2)
        assert letter_d(s) == {(s.face(1),): -1, (s.front(1), s.back(1)): 1}

    def test_tetrahedron(self):
        s = simplex_letter("s", 3)
        assert letter_d(s) == {
            (s.face(1),): -1,
            (s.front(1), s.back(2)): 1,
            (s.face(2),): 1,
            (s.front(2), s.back(1)): -1,
        }

    def test_koszul_sign_on_second_letter(self):
        s = simplex_letter("s", 2, "a", "b")
        u = simplex_letter("u", 2, "b", "c")
        d = bar_d(BarWord.of(s, u))
        # |s| = 1 flips the terms coming from u
        assert d.terms[BarWord.of(s, u.face(1))] == 1
        assert d.terms[BarWord.of(s.face(1), u)] == -1

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_d_squared_random(self, seed):
        rng = random.Random(seed)
        for _ in range(10):
            word = random_word(rng, rng.randint(1, 4), max_dim=4)
            assert check_d_squared(word), str(word)

    def test_d_sum_linear(self):
        word = BarWord.of(simplex_letter("s", 3))
        assert d_sum(FormalSum.of(word, 2)) == bar_d(word) * 2

    def test_random_word_bounds(self):
        with pytest.raises(IndexRangeError):
            random_word(random.Random(0), 0)


class TestComposition:
    def test_compose(self):
        s, u = simplex_letter("s", 1, "a", "b"), simplex_letter("u", 2, "b", "c")
        word = compose_words(BarWord.of(s), BarWord.of(u))
        assert word.letters == (s, u)
        assert word.first == "a" and word.last == "c"

    def test_incompatible(self):
        s, u = simplex_letter("s", 1, "a", "b"), simplex_letter("u", 1, "c", "d")
        with pytest.raises(IncompatibleWordsError):
            compose_words(BarWord.of(s), BarWord.of(u))
        with pytest.raises(IncompatibleWordsError):
            BarWord.of(s, u)

    def test_leibniz(self):
        s, u = simplex_letter("s", 2, "a", "b"), simplex_letter("u", 3, "b", "c")
        a, b = FormalSum.of(BarWord.of(s)), FormalSum.of(BarWord.of(u))
        product = compose_sums(a, b)
        # d(ab) = d(a)b + (−1)^{|a|} a d(b)
        expected = compose_sums(d_sum(a), b) + compose_sums(a, d_sum(b)) * -1
        assert d_sum(product) == expected


class TestFormalSum:
    def test_cancellation(self):
        word = BarWord.of(simplex_letter("s", 1))
        total = FormalSum.of(word, 3) - FormalSum.of(word, 3)
        assert total.is_zero
        assert str(total) == "0"

    def test_scaling(self):
        word = BarWord.of(simplex_letter("s", 1))
        assert (2 * FormalSum.of(word)).terms == {word: 2}
        assert len(FormalSum.of(word) + FormalSum.of(word)) == 1


class TestRealization:
    def test_constant_triangle(self, constant_A2_D, chart2):
        tri = affine_simplex([[0.1, 0.1], [0.9, 0.2], [0.4, 0.8]], chart2, "tri")
        word = BarWord.of(Letter.simplex("tri", 2))
        quad = QuadSpec(rk4_steps=200, gauss_order=4)
        assert dg_functor_residual(word, {"tri": tri}, constant_A2_D, quad, max_workers=1) < 1e-8

    def test_detects_non_chain_map(self, chart2, quad):
        dims = GradedDims.of({0: 1, 1: 1})
        D = const_superconnection(dims, {0: {(): [[0, 0], [1, 0]]}, 1: {("x1",): [[1, 0], [0, 0]]}}, chart2)
        edge = affine_simplex([[0, 0.5], [1, 0.5]], chart2, "edge")
        word = BarWord.of(Letter.simplex("edge", 1))
        assert dg_functor_residual(word, {"edge": edge}, D, quad, max_workers=1) > 0.1

    def test_detects_curvature_on_triangle(self, witness_D, quad):
        tri = affine_simplex([[0.1, 0.1], [0.9, 0.2], [0.5, 0.9]], witness_D.chart, "tri")
        word = BarWord.of(Letter.simplex("tri", 2))
        assert dg_functor_residual(word, {"tri": tri}, witness_D, quad, max_workers=1) > 1e-2

    def test_unknown_simplex(self, constant_A2_D, quad):
        word = BarWord.of(Letter.simplex("missing", 1))
        with pytest.raises(IndexRangeError):
            dg_functor_residual(word, {}, constant_A2_D, quad)

    def test_flat_words(self, flat_workspace):
        word = flat_workspace.words["faces"]
        residual = dg_functor_residual(word, flat_workspace.simplices, flat_workspace.D, flat_workspace.quad, 1)
        assert residual < 1e-6
