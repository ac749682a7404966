"""
Scenario and report models.

A scenario is one JSON document describing the chart, the graded space, the
superconnection and the geometric inputs the suites run on. Expression
strings follow the expr grammar; matrices are full N×N over the total space.
"""

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

Entry = Union[str, float, int]
Matrix = List[List[Entry]]


# ── Scenario inputs ──

class ChartSpec(BaseModel):
    names: List[str] = Field(..., min_length=1, description="Coordinate names, e.g. ['x1', 'x2'].")
    bounds: Optional[List[List[float]]] = Field(
        default=None,
        description="One [lower, upper] pair per coordinate; defaults to the unit box.",
    )

    @model_validator(mode="after")
    def _bounds_match(self) -> "ChartSpec":
        if self.bounds is not None:
            if len(self.bounds) != len(self.names) or any(len(b) != 2 for b in self.bounds):
                raise ValueError("bounds needs one [lower, upper] pair per coordinate")
        return self


class FormTerm(BaseModel):
    dx: List[str] = Field(default_factory=list, description="Coordinate names of the monomial dx^I (any order).")
    matrix: Matrix = Field(..., description="Full N×N coefficient matrix of expression strings or numbers.")


class FormSpec(BaseModel):
    p: int = Field(..., ge=0, description="Form degree; the endo degree is 1 - p.")
    terms: List[FormTerm] = Field(default_factory=list)

    @model_validator(mode="after")
    def _degrees_match(self) -> "FormSpec":
        for term in self.terms:
            if len(term.dx) != self.p:
                raise ValueError(f"A_{self.p} term d{term.dx} has {len(term.dx)} differentials")
        return self


class GaugeSpec(BaseModel):
    g: Matrix = Field(..., description="Degree-0 gauge matrix (block diagonal).")
    g_inv: Matrix = Field(..., description="Its inverse, checked numerically at random points.")


class FamilySpec(BaseModel):
    name: str
    params: List[str] = Field(default_factory=list, description="Parameter axes w1..wk.")
    components: List[str] = Field(..., description="Chart coordinates as expressions in t and the parameters.")
    breakpoints: List[float] = Field(default_factory=list, description="Times in (0, 1) where the family is only piecewise smooth.")
    w: Optional[List[float]] = Field(default=None, description="Parameter point for pointwise checks; cube centre by default.")
    reparam: Optional[str] = Field(default=None, description="Optional reparametrization phi(t, w) fixing 0 and 1.")
    u_mid: float = Field(default=0.5, ge=0.0, le=1.0, description="Split point of the factorization check.")

    @field_validator("params")
    @classmethod
    def _param_names(cls, value: List[str]) -> List[str]:
        for name in value:
            if not (name.startswith("w") and name[1:].isdigit()):
                raise ValueError(f"Parameter axes are named w<digits>, got {name!r}")
        return value

    @model_validator(mode="after")
    def _w_length(self) -> "FamilySpec":
        if self.w is not None and len(self.w) != len(self.params):
            raise ValueError(f"Family {self.name!r}: w has {len(self.w)} entries for {len(self.params)} parameters")
        return self


class SimplexSpec(BaseModel):
    name: str
    dim: Optional[int] = Field(default=None, ge=0, description="Dimension; inferred from points when absent.")
    components: Optional[List[str]] = Field(default=None, description="Chart coordinates as expressions in y1..yk.")
    points: Optional[List[List[Entry]]] = Field(default=None, description="Vertices of an affine simplex, v_0 first.")

    @model_validator(mode="after")
    def _one_description(self) -> "SimplexSpec":
        if (self.components is None) == (self.points is None):
            raise ValueError(f"Simplex {self.name!r} needs exactly one of 'components' or 'points'")
        if self.components is not None and self.dim is None:
            raise ValueError(f"Simplex {self.name!r} given by components needs 'dim'")
        if self.points is not None:
            if self.dim is not None and self.dim != len(self.points) - 1:
                raise ValueError(f"Simplex {self.name!r}: {len(self.points)} points for dim {self.dim}")
            self.dim = len(self.points) - 1
        return self


class ChainSpec(BaseModel):
    name: str
    barycenters: List[List[float]] = Field(..., min_length=2, description="Barycenters b(σ_0), …, b(σ_k) of a composable chain.")


class LetterSpec(BaseModel):
    simplex: str = Field(..., description="Name of a declared simplex.")
    vertices: Optional[List[int]] = Field(default=None, description="Face as increasing vertex positions; whole simplex by default.")


class WordSpec(BaseModel):
    name: str
    letters: List[LetterSpec] = Field(..., min_length=1)


class QuadratureSpec(BaseModel):
    rk4_steps: Optional[int] = Field(default=None, ge=1)
    gauss_order: Optional[int] = Field(default=None, ge=1)
    subdivisions: Optional[int] = Field(default=None, ge=1)


class Scenario(BaseModel):
    """A complete verification input."""

    name: str = Field(..., description="Scenario identifier, used in logs and digests.")
    chart: ChartSpec
    dims: Dict[int, int] = Field(..., description="Graded dimensions, degree -> dim V^degree.")
    forms: List[FormSpec] = Field(default_factory=list, description="The nonzero A_p.")
    gauge: Optional[GaugeSpec] = Field(default=None, description="Gauge applied to the forms before any check.")
    families: List[FamilySpec] = Field(default_factory=list)
    simplices: List[SimplexSpec] = Field(default_factory=list)
    chains: List[ChainSpec] = Field(default_factory=list)
    words: List[WordSpec] = Field(default_factory=list)
    quadrature: Optional[QuadratureSpec] = None
    tolerances: Dict[str, float] = Field(default_factory=dict, description="Per-check or per-class (exact, smooth, pl) overrides.")
    random_words: int = Field(default=50, ge=0, description="Random words for the d^2 = 0 property suite.")
    face_lemma_k: List[int] = Field(default_factory=lambda: [2, 3, 4])

    @property
    def total_dim(self) -> int:
        return sum(n for n in self.dims.values() if n > 0)

    @model_validator(mode="after")
    def _consistent(self) -> "Scenario":
        n = self.total_dim
        if n == 0:
            raise ValueError("The graded space is zero-dimensional")
        if any(v < 0 for v in self.dims.values()):
            raise ValueError("Graded dimensions must be non-negative")

        def check_matrix(matrix: Matrix, where: str) -> None:
            if len(matrix) != n or any(len(row) != n for row in matrix):
                raise ValueError(f"{where}: expected a {n}x{n} matrix")

        seen = set()
        for form in self.forms:
            if form.p in seen:
                raise ValueError(f"A_{form.p} is declared twice")
            seen.add(form.p)
            if form.p > len(self.chart.names):
                raise ValueError(f"A_{form.p} exceeds the chart dimension {len(self.chart.names)}")
            for term in form.terms:
                check_matrix(term.matrix, f"A_{form.p} d{term.dx}")
                unknown = set(term.dx) - set(self.chart.names)
                if unknown:
                    raise ValueError(f"A_{form.p} uses coordinates {sorted(unknown)} outside the chart")
        if self.gauge is not None:
            check_matrix(self.gauge.g, "gauge g")
            check_matrix(self.gauge.g_inv, "gauge g_inv")
        for family in self.families:
            if len(family.components) != len(self.chart.names):
                raise ValueError(f"Family {family.name!r} needs {len(self.chart.names)} components")
        names = set()
        for simplex in self.simplices:
            if simplex.name in names:
                raise ValueError(f"Simplex {simplex.name!r} is declared twice")
            names.add(simplex.name)
            if simplex.components is not None and len(simplex.components) != len(self.chart.names):
                raise ValueError(f"Simplex {simplex.name!r} needs {len(self.chart.names)} components")
            for point in simplex.points or []:
                if len(point) != len(self.chart.names):
                    raise ValueError(f"Simplex {simplex.name!r} has a point of the wrong length")
        for chain in self.chains:
            if any(len(b) != len(self.chart.names) for b in chain.barycenters):
                raise ValueError(f"Chain {chain.name!r} has a barycenter of the wrong length")
        for word in self.words:
            for letter in word.letters:
                if letter.simplex not in names:
                    raise ValueError(f"Word {word.name!r} refers to unknown simplex {letter.simplex!r}")
        return self


# ── Report ──

class CheckRecord(BaseModel):
    name: str = Field(..., description="Check identifier, e.g. 'stokes[loop]'.")
    suite: str = Field(..., description="Subcommand the check belongs to.")
    inputs_digest: str = Field(..., description="sha256 of the canonical inputs of the check.")
    residual: float
    tolerance: float
    passed: bool

    @model_validator(mode="after")
    def _verdict(self) -> "CheckRecord":
        if self.passed != (self.residual <= self.tolerance):
            raise ValueError("passed must equal residual <= tolerance")
        return self


class Report(BaseModel):
    scenario: str
    checks: List[CheckRecord] = Field(default_factory=list)
    timing: Dict[str, object] = Field(default_factory=dict, description="Kept out of the report body.")

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def body(self) -> List[dict]:
        """The deterministic part: one record per check in declaration order."""
        return [check.model_dump() for check in self.checks]
