"""
Path-family checks: chain-map property of Φ, three independent computations
of Φ against each other, factorization, the s-derivative and reparametrization
invariance of Ψ, and the recursion/iterated-integral oracles for Ψ_p.
"""

from typing import List

from ..core.graded import op_norm
from ..core.quadrature import QuadSpec
from ..core.transport import (
    check_chain_map,
    ds_convergence,
    check_factorization,
    check_reparam,
    phi_product_limit,
    phi_series,
    psi_iterated,
    psi_recursive,
    transport_phi,
    transport_psi,
)
from ..scenario import FamilyEntry, Workspace
from .base import Check, Shared, flag

TRANSPORT = "transport"
PSI = "psi"
# Halving h must cut a second-order central difference by about 4.
DS_MIN_RATIO = 3.0


def _smooth(entry: FamilyEntry) -> str:
    return "pl" if entry.family.breakpoints else "smooth"


def build(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    D = workspace.D
    checks: List[Check] = []
    for name, entry in workspace.families.items():
        fam, w = entry.family, entry.w
        params = {"family": name, "w": list(w)}

        def series(fam=fam, w=w) -> float:
            return op_norm(phi_series(fam, w, 0.0, 1.0, D) - transport_phi(fam, w, 0.0, 1.0, D, quad))

        ds = Shared(lambda fam=fam, w=w: ds_convergence(fam, w, D, quad, fam.k))

        def product(fam=fam, w=w) -> float:
            limit = phi_product_limit(fam, w, 0.0, 1.0, D, 10 * quad.rk4_steps)
            return op_norm(limit - transport_phi(fam, w, 0.0, 1.0, D, quad))

        checks.extend([
            Check(f"chain_map[{name}]", TRANSPORT, _smooth(entry),
                  lambda fam=fam, w=w: check_chain_map(fam, w, D, quad), params),
            Check(f"series[{name}]", TRANSPORT, _smooth(entry), series, params),
            Check(f"product_limit[{name}]", TRANSPORT, "pl", product,
                  {**params, "intervals": 10 * quad.rk4_steps}),
            Check(f"factorization[{name}]", TRANSPORT, _smooth(entry),
                  lambda fam=fam, w=w, u=entry.spec.u_mid: check_factorization(fam, w, D, quad, u),
                  {**params, "u_mid": entry.spec.u_mid}),
            Check(f"ds[{name}]", TRANSPORT, "pl", lambda ds=ds: ds.get().residual, params),
            Check(f"ds_order[{name}]", TRANSPORT, "exact",
                  lambda ds=ds: flag(ds.get().ratio >= DS_MIN_RATIO), {**params, "min_ratio": DS_MIN_RATIO}),
        ])
        if entry.reparam is not None:
            checks.append(Check(
                f"reparam[{name}]", TRANSPORT, "smooth",
                lambda fam=fam, w=w, phi=entry.reparam: check_reparam(fam, phi, D, quad, w),
                {**params, "reparam": entry.spec.reparam},
            ))
    return checks


def build_psi(workspace: Workspace, quad: QuadSpec) -> List[Check]:
    """Ψ_p(1,0) from the joint RK4 against the u-recursion and the iterated integrals."""
    D = workspace.D
    checks: List[Check] = []
    for name, entry in workspace.families.items():
        fam, w = entry.family, entry.w
        for p in range(1, fam.k + 1):
            params = {"family": name, "w": list(w), "p": p}

            def recursion(fam=fam, w=w, p=p) -> float:
                reference = transport_psi(fam, w, 0.0, 1.0, D, quad, p)[p]
                return (psi_recursive(fam, w, 0.0, 1.0, D, quad, p) - reference).norm()

            def iterated(fam=fam, w=w, p=p) -> float:
                reference = transport_psi(fam, w, 0.0, 1.0, D, quad, p)[p]
                return (psi_iterated(fam, w, D, quad, p) - reference).norm()

            checks.append(Check(f"psi_recursion[{name},p={p}]", PSI, _smooth(entry), recursion, params))
            if not fam.breakpoints:
                checks.append(Check(f"psi_iterated[{name},p={p}]", PSI, "smooth", iterated, params))
    return checks
