"""
Simplex checks: exact face lemmas of θ, simplicial identities, the
orientation of ψ_1, the twisting-cochain equation on every declared simplex
and the A∞ relation on every declared chain.
"""

from typing import List, Optional

from ..config import settings
from ..core.graded import GradedEndo, compose, op_norm
from ..core.quadrature import QuadSpec
from ..core.simplex import (
    ainfty_residual,
    check_face_lemmas,
    check_simplicial_identities,
    psi_simplex,
    reverse,
    twisting_residual,
)
from ..logger import logger
from ..scenario import Workspace
from .base import Check, flag

SIMPLEX = "simplex"
TWISTING = "twisting"
AINFTY = "ainfty"


def build(workspace: Workspace, quad: QuadSpec, seed: Optional[int] = None) -> List[Check]:
    D = workspace.D
    seed = settings.seed if seed is None else seed
    checks: List[Check] = []
    for k in workspace.scenario.face_lemma_k:
        def lemmas(k=k) -> float:
            result = check_face_lemmas(k, seed=seed)
            if not result.ok:
                logger.warning("Face lemma failed for k=%d: %s", k, result.witness, extra={"check": f"face_lemmas[k={k}]"})
            return flag(result.ok)

        checks.append(Check(f"face_lemmas[k={k}]", SIMPLEX, "exact", lemmas, {"k": k, "seed": seed}))

    for name, sigma in workspace.simplices.items():
        if sigma.dim >= 2:
            checks.append(Check(
                f"simplicial[{name}]", SIMPLEX, "exact",
                lambda sigma=sigma: flag(check_simplicial_identities(sigma)), {"simplex": name},
            ))
        if sigma.dim == 1:
            def orientation(sigma=sigma) -> float:
                there = psi_simplex(sigma, D, quad)
                back = psi_simplex(reverse(sigma), D, quad)
                return op_norm(compose(there, back) - GradedEndo.identity(D.dims))

            checks.append(Check(f"orientation[{name}]", SIMPLEX, "smooth", orientation, {"simplex": name}))
    return checks


def build_twisting(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    """Dimension 1 integrates smooth paths; higher simplices go through the kinks of θ."""
    D = workspace.D
    return [
        Check(
            f"twisting[{name}]", TWISTING, "smooth" if sigma.dim == 1 else "pl",
            lambda sigma=sigma: twisting_residual(sigma, D, quad),
            {"simplex": name, "dim": sigma.dim},
        )
        for name, sigma in workspace.simplices.items()
        if sigma.dim >= 1
    ]


def build_ainfty(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    D = workspace.D
    return [
        Check(
            f"ainfty[{name}]", AINFTY, "smooth" if len(points) == 2 else "pl",
            lambda points=points: ainfty_residual(points, D, quad),
            {"chain": name, "k": len(points) - 1},
        )
        for name, points in workspace.chains.items()
    ]
