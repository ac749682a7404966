from typing import List

from ..core.quadrature import QuadSpec
from ..core.transport import check_stokes, has_fixed_endpoints
from ..logger import logger
from ..scenario import Workspace
from .base import Check

SUITE = "stokes"


def build(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    """Homotopy formula for every family with parameters and fixed endpoints."""
    D = workspace.D
    checks: List[Check] = []
    for name, entry in workspace.families.items():
        fam = entry.family
        if fam.k < 1:
            logger.debug("stokes: %s has no parameters, skipped", name)
            continue
        if not has_fixed_endpoints(fam, D):
            logger.info("stokes: %s moves its endpoints, skipped", name, extra={"check": f"stokes[{name}]"})
            continue
        checks.append(Check(
            f"stokes[{name}]", SUITE, "pl" if fam.breakpoints else "smooth",
            lambda fam=fam: check_stokes(fam, D, quad),
            {"family": name, "q": fam.k},
        ))
    return checks
