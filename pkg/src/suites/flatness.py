from typing import List

from ..core.quadrature import QuadSpec
from ..core.superconn import flatness_residuals
from ..scenario import Workspace
from .base import Check, Shared

SUITE = "check-flat"


def build(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    """One record per curvature component F_q, q = -1 .. 2m-1."""
    D = workspace.D
    report = Shared(lambda: flatness_residuals(D))
    return [
        Check(
            name=f"flatness[q={q}]",
            suite=SUITE,
            kind="exact",
            run=lambda q=q: report.get().residuals[q],
            params={"q": q},
        )
        for q in range(-1, 2 * D.m)
    ]
