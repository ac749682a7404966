"""
Scenario loading: JSON file → validated `Scenario` → concrete objects.

Loading order mirrors the settings layering: pydantic validates the document,
then the expressions are parsed into sympy trees and assembled into the
superconnection, families, simplices, chains and bar words the suites use.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy
from pydantic import ValidationError

from .config import SCENARIO_DIR
from .core.cobar import BarWord, Letter
from .core.expr import Chart, ScalarExpr
from .core.forms import EndForm, merge_sign
from .core.graded import GradedDims
from .core.quadrature import QuadSpec
from .core.simplex import Simplex, affine_simplex, parse_simplex
from .core.superconn import Superconnection, gauge_transform
from .core.transport import PathFamily, SmoothMap
from .exceptions import ExprSyntaxError, SCTError, ScenarioError, ScenarioValidationError
from .logger import logger
from .models import Entry, FamilySpec, Matrix, Scenario

Params = Tuple[float, ...]


@dataclass
class FamilyEntry:
    family: PathFamily
    spec: FamilySpec
    w: Params
    reparam: Optional[SmoothMap] = None


@dataclass
class Workspace:
    """Everything a suite needs, built once per run."""

    scenario: Scenario
    chart: Chart
    dims: GradedDims
    D: Superconnection
    quad: QuadSpec
    families: Dict[str, FamilyEntry] = field(default_factory=dict)
    simplices: Dict[str, Simplex] = field(default_factory=dict)
    chains: Dict[str, List[List[float]]] = field(default_factory=dict)
    words: Dict[str, BarWord] = field(default_factory=dict)


# ── Reading ─────────────────────────────────────────────

def resolve_path(path: Union[str, Path]) -> Path:
    """Paths that do not exist as given are looked up in the bundled scenarios."""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    for bundled in (SCENARIO_DIR / candidate, SCENARIO_DIR / f"{candidate}.json"):
        if bundled.exists():
            return bundled
    raise ScenarioError(f"Scenario file not found: {path}")


def load_scenario(path: Union[str, Path]) -> Scenario:
    source = resolve_path(path)
    try:
        document = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"Cannot read {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    return validate_scenario(document)


def validate_scenario(document: object) -> Scenario:
    try:
        return Scenario.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "scenario"
        raise ScenarioValidationError(f"{where}: {first['msg']} ({exc.error_count()} error(s))") from exc


# ── Building ────────────────────────────────────────────

def _entry(value: Entry, chart: Chart, where: str) -> sympy.Expr:
    if isinstance(value, bool):
        raise ScenarioValidationError(f"{where}: booleans are not matrix entries")
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, float):
        return sympy.Float(value)
    tree = ScalarExpr.parse(value).tree
    stray = {s.name for s in tree.free_symbols} - set(chart.names)
    if stray:
        raise ScenarioValidationError(f"{where}: {sorted(stray)} are not chart coordinates")
    return tree


def _matrix(rows: Matrix, chart: Chart, where: str) -> sympy.Matrix:
    return sympy.Matrix([[_entry(v, chart, where) for v in row] for row in rows])


def build_forms(scenario: Scenario, chart: Chart, dims: GradedDims) -> Dict[int, EndForm]:
    forms: Dict[int, EndForm] = {}
    for spec in scenario.forms:
        coeffs: Dict[Tuple[int, ...], sympy.Matrix] = {}
        for term in spec.terms:
            where = f"A_{spec.p} d{''.join(term.dx)}"
            order = [chart.index(n) for n in term.dx]
            sign, index = 1, ()
            for i in order:
                step, merged = merge_sign(index, (i,))
                if merged is None:
                    sign, index = 0, None
                    break
                sign, index = sign * step, merged
            if index is None:
                logger.warning("%s repeats a differential and is dropped", where)
                continue
            matrix = _matrix(term.matrix, chart, where) * sign
            coeffs[index] = coeffs[index] + matrix if index in coeffs else matrix
        forms[spec.p] = EndForm(chart, dims, spec.p, 1 - spec.p, coeffs)
    return forms


def build_superconnection(scenario: Scenario, chart: Chart, dims: GradedDims) -> Superconnection:
    try:
        D = Superconnection(chart, dims, build_forms(scenario, chart, dims))
        if scenario.gauge is None:
            return D
        g = EndForm(chart, dims, 0, 0, {(): _matrix(scenario.gauge.g, chart, "gauge g")})
        g_inv = EndForm(chart, dims, 0, 0, {(): _matrix(scenario.gauge.g_inv, chart, "gauge g_inv")})
    except ExprSyntaxError:
        raise
    except SCTError as exc:
        raise ScenarioValidationError(exc.detail) from exc
    return gauge_transform(D, g, g_inv)


def _family(spec: FamilySpec, chart: Chart) -> FamilyEntry:
    family = PathFamily.parse(chart, spec.components, spec.params, spec.breakpoints, spec.name)
    w = tuple(spec.w) if spec.w is not None else tuple(0.5 for _ in spec.params)
    reparam = None
    if spec.reparam is not None:
        reparam = SmoothMap.parse(("t", *spec.params), Chart(("t",)), [spec.reparam])
    return FamilyEntry(family, spec, w, reparam)


def vertex_tag(point: Sequence[float]) -> str:
    """Letters compose when these tags match, i.e. when the vertices coincide."""
    return "(" + ",".join(f"{float(x):.12g}" for x in point) + ")"


def build_word(name: str, letters: Sequence[Tuple[str, Optional[Sequence[int]]]],
               simplices: Dict[str, Simplex]) -> BarWord:
    chosen = []
    for base, vertices in letters:
        sigma = simplices[base]
        vertices = tuple(vertices) if vertices is not None else tuple(range(sigma.dim + 1))
        if any(not 0 <= v <= sigma.dim for v in vertices):
            raise ScenarioValidationError(f"Word {name!r}: vertices {vertices} outside {base!r}")
        tags = tuple(vertex_tag(sigma.vertex_point(v)) for v in vertices)
        chosen.append(Letter(base, vertices, tags))
    return BarWord(tuple(chosen))


def build_workspace(
    scenario: Scenario,
    rk4_steps: Optional[int] = None,
    gauss_order: Optional[int] = None,
    subdivisions: Optional[int] = None,
) -> Workspace:
    """Flags beat the scenario's quadrature block, which beats settings."""
    bounds = scenario.chart.bounds
    chart = Chart(tuple(scenario.chart.names), tuple(tuple(b) for b in bounds) if bounds else None)
    dims = GradedDims.of(scenario.dims)
    block = scenario.quadrature
    quad = QuadSpec.default(
        rk4_steps=rk4_steps or (block.rk4_steps if block else None),
        gauss_order=gauss_order or (block.gauss_order if block else None),
        subdivisions=subdivisions or (block.subdivisions if block else None),
    )
    D = build_superconnection(scenario, chart, dims)
    workspace = Workspace(scenario=scenario, chart=chart, dims=dims, D=D, quad=quad)

    try:
        for spec in scenario.families:
            workspace.families[spec.name] = _family(spec, chart)
        for spec in scenario.simplices:
            if spec.points is not None:
                points = [[_entry(v, chart, f"simplex {spec.name}") for v in p] for p in spec.points]
                sigma = affine_simplex(points, chart, spec.name)
            else:
                sigma = parse_simplex(chart, spec.dim, spec.components, spec.name)
            sigma.check_image()
            workspace.simplices[spec.name] = sigma
        for chain in scenario.chains:
            workspace.chains[chain.name] = [list(b) for b in chain.barycenters]
        for word in scenario.words:
            workspace.words[word.name] = build_word(
                word.name, [(letter.simplex, letter.vertices) for letter in word.letters], workspace.simplices,
            )
    except ExprSyntaxError:
        raise
    except SCTError as exc:
        raise ScenarioValidationError(exc.detail) from exc

    logger.info(
        "Loaded scenario %s: %d families, %d simplices, %d chains, %d words",
        scenario.name, len(workspace.families), len(workspace.simplices),
        len(workspace.chains), len(workspace.words),
        extra={"scenario": scenario.name},
    )
    return workspace
