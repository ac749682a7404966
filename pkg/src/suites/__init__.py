"""
Verification suites, one per CLI subcommand.

Each builder maps a loaded workspace and a quadrature spec to a list of
`Check`s; `run_checks` executes them and produces the report.
"""

from typing import Callable, Dict, List, Optional

from ..core.quadrature import QuadSpec
from ..scenario import Workspace
from . import cobar, flatness, simplices, stokes, transport
from .base import Check, Shared, run_checks

Builder = Callable[[Workspace, QuadSpec, Optional[int]], List[Check]]

SUITES: Dict[str, Builder] = {
    "check-flat": lambda ws, quad, seed: flatness.build(ws, quad),
    "transport": lambda ws, quad, seed: transport.build(ws, quad),
    "psi": lambda ws, quad, seed: transport.build_psi(ws, quad),
    "stokes": lambda ws, quad, seed: stokes.build(ws, quad),
    "simplex": lambda ws, quad, seed: simplices.build(ws, quad, seed),
    "twisting": lambda ws, quad, seed: simplices.build_twisting(ws, quad),
    "ainfty": lambda ws, quad, seed: simplices.build_ainfty(ws, quad),
    "cobar": lambda ws, quad, seed: cobar.build(ws, quad, seed),
}

# Suites whose residual shrinks with the Gauss order; they feed the --csv table.
CONVERGENCE_SUITES = ("stokes", "twisting", "ainfty")

SUBCOMMANDS = (*SUITES, "all")


def build_checks(subcommand: str, workspace: Workspace, quad: QuadSpec, seed: Optional[int] = None) -> List[Check]:
    names = list(SUITES) if subcommand == "all" else [subcommand]
    checks: List[Check] = []
    for name in names:
        checks.extend(SUITES[name](workspace, quad, seed))
    return checks


__all__ = ["Check", "Shared", "SUITES", "SUBCOMMANDS", "CONVERGENCE_SUITES", "build_checks", "run_checks"]
