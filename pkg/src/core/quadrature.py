"""
Quadrature rules on [0, 1] and the unit cube.

Composite Gauss-Legendre from numpy's `leggauss`, tensor products over the
parameter cube, and the panel integration matrix used by the iterated-integral
series.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre

from ..config import settings
from ..exceptions import QuadratureConfigError


@dataclass(frozen=True)
class QuadSpec:
    """rk4_steps per unit t, Gauss order per parameter axis, panels per axis."""

    rk4_steps: int
    gauss_order: int
    subdivisions: int = 1

    def __post_init__(self):
        if int(self.rk4_steps) < 1:
            raise QuadratureConfigError(f"rk4_steps must be >= 1, got {self.rk4_steps}")
        if int(self.gauss_order) < 1:
            raise QuadratureConfigError(f"gauss_order must be >= 1, got {self.gauss_order}")
        if int(self.subdivisions) < 1:
            raise QuadratureConfigError(f"subdivisions must be >= 1, got {self.subdivisions}")

    @classmethod
    def default(
        cls,
        rk4_steps: Optional[int] = None,
        gauss_order: Optional[int] = None,
        subdivisions: Optional[int] = None,
    ) -> "QuadSpec":
        return cls(
            rk4_steps=rk4_steps or settings.rk4_steps,
            gauss_order=gauss_order or settings.gauss_order,
            subdivisions=subdivisions or settings.subdivisions,
        )

    def refined(self, factor: int = 2) -> "QuadSpec":
        """Same spec with the Gauss order multiplied (node doubling)."""
        return QuadSpec(self.rk4_steps, self.gauss_order * factor, self.subdivisions)

    def steps_for(self, length: float) -> int:
        return max(1, int(np.ceil(self.rk4_steps * length - 1e-9)))


@lru_cache(maxsize=64)
def gauss_rule(order: int, subdivisions: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1]."""
    if order < 1 or subdivisions < 1:
        raise QuadratureConfigError(f"Invalid rule: order={order}, subdivisions={subdivisions}")
    xi, wi = legendre.leggauss(order)
    width = 1.0 / subdivisions
    nodes = np.concatenate([(j + (xi + 1.0) / 2.0) * width for j in range(subdivisions)])
    weights = np.concatenate([wi * width / 2.0 for _ in range(subdivisions)])
    return nodes, weights


def tensor_rule(k: int, quad: QuadSpec) -> List[Tuple[Tuple[float, ...], float]]:
    """Tensor-product rule on I^k as (point, weight) in ascending node order."""
    nodes, weights = gauss_rule(quad.gauss_order, quad.subdivisions)
    rule = []
    for combo in itertools.product(range(len(nodes)), repeat=k):
        point = tuple(float(nodes[i]) for i in combo)
        weight = float(np.prod([weights[i] for i in combo])) if combo else 1.0
        rule.append((point, weight))
    return rule


@lru_cache(maxsize=16)
def panel_integration(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gauss nodes on [-1, 1], weights, and the matrix S with
    S[j, l] = ∫_{-1}^{ξ_j} L_l(v) dv for the Lagrange basis L_l on the nodes.
    """
    xi, wi = legendre.leggauss(order)
    vander_inv = np.linalg.inv(legendre.legvander(xi, order - 1))
    antiderivatives = np.empty((order, order))
    for l in range(order):
        coeffs = legendre.legint(vander_inv[:, l], lbnd=-1.0)
        antiderivatives[:, l] = legendre.legval(xi, coeffs)
    return xi, wi, antiderivatives
