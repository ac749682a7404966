"""
Cobar words over formal simplices, their differential, and the chain-map check.

A letter is a face of a named base simplex, recorded by its vertex positions
in the base and a label per vertex. Faces, front and back faces are vertex
sublists, so the simplicial identities hold by construction. Letters compose
when the last label of one equals the first label of the next.

    |σ|         = dim σ − 1
    dσ          = Σ_{i=1}^{k−1}(−1)^i ∂_iσ − Σ_{i=1}^{k−1}(−1)^i (f_iσ | b_{k−i}σ)
    d(σ_1|⋯|σ_n) = Σ_m (−1)^{|σ_1|+⋯+|σ_{m−1}|} (σ_1|⋯|dσ_m|⋯|σ_n)
"""

import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Mapping, Optional, Sequence, Tuple

from ..exceptions import IncompatibleWordsError, IndexRangeError, ShapeMismatchError
from .graded import GradedDims, GradedEndo, compose, op_norm
from .quadrature import QuadSpec
from .simplex import Simplex, psi_simplex
from .superconn import Superconnection


@dataclass(frozen=True, order=True)
class Letter:
    base: str
    vertices: Tuple[int, ...]
    tags: Tuple[str, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.tags):
            raise ShapeMismatchError(f"Letter {self.base} needs one tag per vertex")
        if len(self.vertices) < 2:
            raise IndexRangeError(f"Letters have dimension >= 1, got {self.vertices}")
        if list(self.vertices) != sorted(set(self.vertices)):
            raise IndexRangeError(f"Vertex positions must increase: {self.vertices}")

    @classmethod
    def simplex(cls, base: str, dim: int, tags: Optional[Sequence[str]] = None) -> "Letter":
        tags = tuple(tags) if tags is not None else tuple(f"{base}.{i}" for i in range(dim + 1))
        return cls(base, tuple(range(dim + 1)), tags)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def degree(self) -> int:
        return self.dim - 1

    @property
    def first(self) -> str:
        return self.tags[0]

    @property
    def last(self) -> str:
        return self.tags[-1]

    def sub(self, positions: Sequence[int]) -> "Letter":
        return Letter(self.base, tuple(self.vertices[p] for p in positions), tuple(self.tags[p] for p in positions))

    def face(self, i: int) -> "Letter":
        return self.sub([p for p in range(self.dim + 1) if p != i])

    def front(self, p: int) -> "Letter":
        return self.sub(range(p + 1))

    def back(self, q: int) -> "Letter":
        return self.sub(range(self.dim - q, self.dim + 1))

    def __str__(self) -> str:
        return f"{self.base}[{','.join(map(str, self.vertices))}]"


@dataclass(frozen=True, order=True)
class BarWord:
    letters: Tuple[Letter, ...]

    def __post_init__(self):
        if not self.letters:
            raise ShapeMismatchError("A bar word has at least one letter")
        for a, b in zip(self.letters, self.letters[1:]):
            if a.last != b.first:
                raise IncompatibleWordsError(f"{a} ends at {a.last!r} but {b} starts at {b.first!r}")

    @classmethod
    def of(cls, *letters: Letter) -> "BarWord":
        return cls(tuple(letters))

    @property
    def degree(self) -> int:
        return sum(letter.degree for letter in self.letters)

    @property
    def first(self) -> str:
        return self.letters[0].first

    @property
    def last(self) -> str:
        return self.letters[-1].last

    def __str__(self) -> str:
        return "(" + "|".join(str(letter) for letter in self.letters) + ")"


class FormalSum:
    """Finite Z-linear combination of bar words; zero coefficients are dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[BarWord, int]] = None):
        self.terms: Dict[BarWord, int] = {w: int(c) for w, c in (terms or {}).items() if c}

    @classmethod
    def of(cls, word: BarWord, coeff: int = 1) -> "FormalSum":
        return cls({word: coeff})

    def add(self, word: BarWord, coeff: int) -> None:
        value = self.terms.get(word, 0) + coeff
        if value:
            self.terms[word] = value
        else:
            self.terms.pop(word, None)

    def __add__(self, other: "FormalSum") -> "FormalSum":
        result = FormalSum(self.terms)
        for word, coeff in other.terms.items():
            result.add(word, coeff)
        return result

    def __neg__(self) -> "FormalSum":
        return FormalSum({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        return self + (-other)

    def __mul__(self, scalar: int) -> "FormalSum":
        return FormalSum({w: c * scalar for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FormalSum) and self.terms == other.terms

    def __iter__(self) -> Iterator[Tuple[BarWord, int]]:
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(f"{'+' if c > 0 else '-'}{abs(c) if abs(c) != 1 else ''}{w}" for w, c in self)


def letter_d(letter: Letter) -> Dict[Tuple[Letter, ...], int]:
    """dσ as replacement letter sequences with integer coefficients."""
    k = letter.dim
    result: Dict[Tuple[Letter, ...], int] = {}
    for i in range(1, k):
        sign = -1 if i % 2 else 1
        face = (letter.face(i),)
        result[face] = result.get(face, 0) + sign
        split = (letter.front(i), letter.back(k - i))
        result[split] = result.get(split, 0) - sign
    return {seq: c for seq, c in result.items() if c}


def bar_d(word: BarWord) -> FormalSum:
    result = FormalSum()
    shift = 0
    letters = word.letters
    for m, letter in enumerate(letters):
        sign = -1 if shift % 2 else 1
        for replacement, coeff in letter_d(letter).items():
            result.add(BarWord(letters[:m] + replacement + letters[m + 1:]), sign * coeff)
        shift += letter.degree
    return result


def d_sum(total: FormalSum) -> FormalSum:
    result = FormalSum()
    for word, coeff in total:
        result = result + bar_d(word) * coeff
    return result


def check_d_squared(word: BarWord) -> bool:
    return d_sum(bar_d(word)).is_zero


def compose_words(a: BarWord, b: BarWord) -> BarWord:
    """Concatenation (σ_1|⋯|σ_n)∘(τ_1|⋯|τ_m) = (σ_1|⋯|σ_n|τ_1|⋯|τ_m)."""
    if a.last != b.first:
        raise IncompatibleWordsError(f"{a} ends at {a.last!r} but {b} starts at {b.first!r}")
    return BarWord(a.letters + b.letters)


def compose_sums(a: FormalSum, b: FormalSum) -> FormalSum:
    result = FormalSum()
    for wa, ca in a:
        for wb, cb in b:
            result.add(compose_words(wa, wb), ca * cb)
    return result


def random_word(rng: random.Random, letters: int, max_dim: int = 3) -> BarWord:
    """Composable word of the given length with letter dimensions in [1, max_dim]."""
    if letters < 1 or max_dim < 1:
        raise IndexRangeError("random_word needs at least one letter of dimension >= 1")
    chosen = []
    start = "p0"
    for n in range(letters):
        dim = rng.randint(1, max_dim)
        tags = [start] + [f"s{n}.{i}" for i in range(1, dim)] + [f"p{n + 1}"]
        chosen.append(Letter.simplex(f"s{n}", dim, tags))
        start = tags[-1]
    return BarWord(tuple(chosen))


# ── Realization by ψ ────────────────────────────────────

PsiFn = Callable[[Letter], GradedEndo]


def evaluate_word(word: BarWord, psi: PsiFn) -> GradedEndo:
    """ψ_*(σ_1|⋯|σ_n) = ψ(σ_1)ψ(σ_2)⋯ψ(σ_n)."""
    value = psi(word.letters[0])
    for letter in word.letters[1:]:
        value = compose(value, psi(letter))
    return value


def evaluate_sum(total: FormalSum, psi: PsiFn, dims: GradedDims, degree: int) -> GradedEndo:
    """Linear extension of ψ_*; `dims`/`degree` type the empty sum."""
    value = GradedEndo.zero(dims, degree)
    for word, coeff in total:
        value = value + evaluate_word(word, psi) * coeff
    return value


class LetterPsi:
    """ψ of letters realized by concrete simplices, cached per face."""

    def __init__(self, simplices: Mapping[str, Simplex], D: Superconnection, quad: QuadSpec,
                 max_workers: Optional[int] = None):
        self.simplices = simplices
        self.D = D
        self.quad = quad
        self.max_workers = max_workers
        self._cache: Dict[Tuple[str, Tuple[int, ...]], GradedEndo] = {}

    def base(self, letter: Letter) -> Simplex:
        if letter.base not in self.simplices:
            raise IndexRangeError(f"No simplex named {letter.base!r}")
        return self.simplices[letter.base]

    def endpoint(self, letter: Letter, last: bool) -> GradedEndo:
        v = letter.vertices[-1] if last else letter.vertices[0]
        return psi_simplex(self.base(letter).restrict([v]), self.D, self.quad)

    def __call__(self, letter: Letter) -> GradedEndo:
        key = (letter.base, letter.vertices)
        if key not in self._cache:
            face = self.base(letter).restrict(letter.vertices)
            self._cache[key] = psi_simplex(face, self.D, self.quad, self.max_workers)
        return self._cache[key]


def dg_functor_residual(word: BarWord, simplices: Mapping[str, Simplex], D: Superconnection,
                        quad: QuadSpec, max_workers: Optional[int] = None) -> float:
    """‖ψ_*(dw) − (∂ψ_*(w) − (−1)^{deg w}ψ_*(w)∂)‖ with ∂ = A_0 at the word's ends."""
    psi = LetterPsi(simplices, D, quad, max_workers)
    value = evaluate_word(word, psi)
    start = psi.endpoint(word.letters[0], last=False)
    end = psi.endpoint(word.letters[-1], last=True)
    sign = -1.0 if word.degree % 2 else 1.0
    expected = compose(start, value) - compose(value, end) * sign
    image = evaluate_sum(bar_d(word), psi, D.dims, value.degree + 1)
    return op_norm(image - expected)
