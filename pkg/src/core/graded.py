"""
Graded vector spaces and degree-homogeneous endomorphisms.

A GradedEndo of degree e is stored as one dense (N x N) matrix over the total
space V = ⊕_k V^k, with V^k occupying a contiguous slice (degrees ascending).
Only the blocks V^k → V^{k+e} may be nonzero; degrees outside the support are
zero, so products automatically drop blocks whose target leaves the support.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, ShapeMismatchError


@dataclass(frozen=True)
class GradedDims:
    """Finite-support map degree k → dim V^k."""

    dims: Tuple[Tuple[int, int], ...]
    offsets: Dict[int, int] = field(init=False, repr=False, compare=False, hash=False)
    total: int = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        cleaned = {}
        for degree, n in self.dims:
            if int(n) < 0:
                raise ShapeMismatchError(f"Negative dimension {n} in degree {degree}")
            if int(n) > 0:
                cleaned[int(degree)] = int(n)
        ordered = tuple(sorted(cleaned.items()))
        object.__setattr__(self, "dims", ordered)
        offsets, running = {}, 0
        for degree, n in ordered:
            offsets[degree] = running
            running += n
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "total", running)

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "GradedDims":
        return cls(tuple((int(k), int(v)) for k, v in mapping.items()))

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.dims)

    def dim(self, degree: int) -> int:
        return dict(self.dims).get(degree, 0)

    def slice(self, degree: int) -> slice:
        start = self.offsets.get(degree, 0)
        return slice(start, start + self.dim(degree))

    def mask(self, degree: int) -> np.ndarray:
        return _mask(self, degree)

    def degree_of_index(self, index: int) -> int:
        for k, n in self.dims:
            if self.offsets[k] <= index < self.offsets[k] + n:
                return k
        raise ShapeMismatchError(f"Index {index} outside the total space of size {self.total}")


@lru_cache(maxsize=256)
def _mask(dims: GradedDims, degree: int) -> np.ndarray:
    mask = np.zeros((dims.total, dims.total), dtype=bool)
    for k, _ in dims.dims:
        if dims.dim(k + degree):
            mask[dims.slice(k + degree), dims.slice(k)] = True
    mask.setflags(write=False)
    return mask


class GradedEndo:
    """Degree-e endomorphism of a graded space (immutable by convention)."""

    __slots__ = ("dims", "degree", "matrix")

    def __init__(self, dims: GradedDims, degree: int, matrix: np.ndarray, *, check: bool = True):
        matrix = np.asarray(matrix, dtype=float)
        if check:
            if matrix.shape != (dims.total, dims.total):
                raise ShapeMismatchError(
                    f"Expected a {dims.total}x{dims.total} matrix, got {matrix.shape}"
                )
            stray = matrix[~dims.mask(degree)]
            if stray.size and np.any(stray != 0.0):
                raise ShapeMismatchError(f"Entries outside the degree-{degree} blocks are nonzero")
        self.dims = dims
        self.degree = int(degree)
        self.matrix = matrix

    # ── Constructors ──

    @classmethod
    def zero(cls, dims: GradedDims, degree: int) -> "GradedEndo":
        return cls(dims, degree, np.zeros((dims.total, dims.total)), check=False)

    @classmethod
    def identity(cls, dims: GradedDims) -> "GradedEndo":
        return cls(dims, 0, np.eye(dims.total), check=False)

    @classmethod
    def from_blocks(cls, dims: GradedDims, degree: int, blocks: Mapping[int, object]) -> "GradedEndo":
        """Build from blocks k → (n_{k+e} x n_k) matrices; absent blocks are zero."""
        matrix = np.zeros((dims.total, dims.total))
        for k, block in blocks.items():
            block = np.atleast_2d(np.asarray(block, dtype=float))
            expected = (dims.dim(k + degree), dims.dim(k))
            if block.shape != expected:
                if not np.any(block) and 0 in expected:
                    continue
                raise ShapeMismatchError(
                    f"Block V^{k} -> V^{k + degree} must be {expected}, got {block.shape}"
                )
            matrix[dims.slice(k + degree), dims.slice(k)] = block
        return cls(dims, degree, matrix, check=False)

    # ── Accessors ──

    def block(self, k: int) -> np.ndarray:
        return self.matrix[self.dims.slice(k + self.degree), self.dims.slice(k)]

    def blocks(self) -> Iterator[Tuple[int, np.ndarray]]:
        for k in self.dims.degrees:
            if self.dims.dim(k + self.degree):
                yield k, self.block(k)

    # ── Arithmetic ──

    def _same_space(self, other: "GradedEndo") -> None:
        if self.dims != other.dims:
            raise DimensionMismatchError(f"{self.dims} vs {other.dims}")

    def __add__(self, other: "GradedEndo") -> "GradedEndo":
        self._same_space(other)
        if self.degree != other.degree:
            raise DimensionMismatchError(f"Cannot add degrees {self.degree} and {other.degree}")
        return GradedEndo(self.dims, self.degree, self.matrix + other.matrix, check=False)

    def __sub__(self, other: "GradedEndo") -> "GradedEndo":
        return self + (-other)

    def __neg__(self) -> "GradedEndo":
        return GradedEndo(self.dims, self.degree, -self.matrix, check=False)

    def __mul__(self, scalar: float) -> "GradedEndo":
        return GradedEndo(self.dims, self.degree, self.matrix * float(scalar), check=False)

    __rmul__ = __mul__

    def __matmul__(self, other: "GradedEndo") -> "GradedEndo":
        return compose(self, other)

    def allclose(self, other: "GradedEndo", atol: float = 1e-12) -> bool:
        return self.dims == other.dims and np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol)

    def __repr__(self) -> str:
        return f"GradedEndo(degree={self.degree}, dims={dict(self.dims.dims)}, norm={op_norm(self):.3g})"


def compose(f: GradedEndo, g: GradedEndo) -> GradedEndo:
    """(f∘g)_k = f_{k+b} g_k; no sign."""
    f._same_space(g)
    return GradedEndo(f.dims, f.degree + g.degree, f.matrix @ g.matrix, check=False)


def super_commutator(a: GradedEndo, b: GradedEndo) -> GradedEndo:
    """[a, b] = ab − (−1)^{|a||b|} ba."""
    sign = -1.0 if (a.degree * b.degree) % 2 else 1.0
    a._same_space(b)
    return GradedEndo(a.dims, a.degree + b.degree, a.matrix @ b.matrix - sign * (b.matrix @ a.matrix), check=False)


def op_norm(a: GradedEndo) -> float:
    """Frobenius norm over all blocks (identity on dims (1,1) has norm √2)."""
    return float(np.linalg.norm(a.matrix))
