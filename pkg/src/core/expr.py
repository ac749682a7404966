"""
Scalar expression DSL: tokenizer, recursive-descent parser, evaluation and
symbolic differentiation.

Grammar:
    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' ['-'] integer)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := sin | cos | exp
    ident  := x[0-9]+ | w[0-9]+ | y[0-9]+ | t

Parsed trees are sympy expressions; sympy supplies exact rational constants,
derivatives and light simplification.
"""

import math
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

from ..exceptions import (
    DivisionByZeroError,
    EvaluationError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownIdentifierError,
)

IDENT_RE = re.compile(r"x[0-9]+|w[0-9]+|y[0-9]+|t")
FUNCTIONS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>[0-9]+(?:\.[0-9]*)?|\.[0-9]+)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


@lru_cache(maxsize=None)
def symbol(name: str) -> sympy.Symbol:
    """The one sympy symbol used for a coordinate name everywhere in the package."""
    return sympy.Symbol(name)


# ── Tokenizer ───────────────────────────────────────────

@dataclass(frozen=True)
class Token:
    kind: str   # "number", "word", "op" or "eof"
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"Unexpected character {text[offset]!r}", position=offset)
        kind = match.lastgroup or "op"
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ── Parser ──────────────────────────────────────────────

class _Parser:
    """Recursive-descent parser producing sympy trees."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise ExprSyntaxError(f"Expected {text!r}, found {found!r}", position=self.current.pos)
        return self._advance()

    def parse(self) -> sympy.Expr:
        tree = self.expr()
        if self.current.kind != "eof":
            raise ExprSyntaxError(f"Unexpected {self.current.text!r}", position=self.current.pos)
        return tree

    def expr(self) -> sympy.Expr:
        value = self.term()
        while self.current.text in ("+", "-"):
            op = self._advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> sympy.Expr:
        value = self.factor()
        while self.current.text in ("*", "/"):
            op = self._advance().text
            rhs = self.factor()
            value = value * rhs if op == "*" else value / rhs
        return value

    def factor(self) -> sympy.Expr:
        if self.current.text == "-":
            self._advance()
            return -self.factor()
        value = self.base()
        if self.current.text == "^":
            self._advance()
            sign = 1
            if self.current.text == "-":
                self._advance()
                sign = -1
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise ExprSyntaxError("Exponent must be an integer", position=token.pos)
            self._advance()
            value = value ** (sign * int(token.text))
        return value

    def base(self) -> sympy.Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return sympy.Rational(token.text)
        if token.kind == "word":
            self._advance()
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return FUNCTIONS[token.text](arg)
            if IDENT_RE.fullmatch(token.text):
                return symbol(token.text)
            raise UnknownIdentifierError(f"Unknown identifier {token.text!r}", position=token.pos)
        if token.text == "(":
            self._advance()
            value = self.expr()
            self._expect(")")
            return value
        found = token.text or "end of input"
        raise ExprSyntaxError(f"Unexpected {found!r}", position=token.pos)


# ── Printer ─────────────────────────────────────────────

def to_text(tree: sympy.Expr) -> str:
    """Print a sympy tree back into grammar text (fully parenthesized)."""
    if tree is sympy.E:
        return "exp(1)"
    if isinstance(tree, sympy.Symbol):
        return tree.name
    if isinstance(tree, sympy.Integer):
        return str(tree) if tree >= 0 else f"(-{-tree})"
    if isinstance(tree, sympy.Rational):
        text = f"{abs(tree.p)}/{tree.q}"
        return f"(-{text})" if tree < 0 else f"({text})"
    if isinstance(tree, sympy.Float):
        return repr(float(tree)) if tree >= 0 else f"(-{repr(float(-tree))})"
    if isinstance(tree, sympy.Add):
        return "(" + " + ".join(to_text(arg) for arg in tree.args) + ")"
    if isinstance(tree, sympy.Mul):
        return "(" + "*".join(to_text(arg) for arg in tree.args) + ")"
    if isinstance(tree, sympy.Pow) and tree.exp.is_Integer:
        return f"({to_text(tree.base)}^{int(tree.exp)})"
    if isinstance(tree, sympy.exp):
        return f"exp({to_text(tree.args[0])})"
    if isinstance(tree, (sympy.sin, sympy.cos)):
        return f"{type(tree).__name__}({to_text(tree.args[0])})"
    raise EvaluationError(f"Cannot print {tree!r} in the expression grammar")


# ── ScalarExpr ──────────────────────────────────────────

@dataclass(frozen=True)
class ScalarExpr:
    """Immutable symbolic scalar field."""

    tree: sympy.Expr

    @classmethod
    def parse(cls, text: str) -> "ScalarExpr":
        return cls(_Parser(text).parse())

    @classmethod
    def constant(cls, value) -> "ScalarExpr":
        return cls(sympy.sympify(value))

    @cached_property
    def free_names(self) -> Tuple[str, ...]:
        return tuple(sorted(s.name for s in self.tree.free_symbols))

    @cached_property
    def _compiled(self) -> Callable[..., float]:
        args = [symbol(name) for name in self.free_names]
        return sympy.lambdify(args, self.tree, modules="math")

    def evaluate(self, point: Mapping[str, float]) -> float:
        missing = [name for name in self.free_names if name not in point]
        if missing:
            raise UnboundVariableError(f"Unbound variable(s): {', '.join(missing)}")
        if self.tree.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
            raise DivisionByZeroError(f"Expression {self} has a pole")
        try:
            value = float(self._compiled(*(float(point[name]) for name in self.free_names)))
        except ZeroDivisionError as exc:
            raise DivisionByZeroError(f"Division by zero in {self}") from exc
        except (OverflowError, ValueError, TypeError) as exc:
            raise EvaluationError(f"Cannot evaluate {self}: {exc}") from exc
        if not math.isfinite(value):
            raise DivisionByZeroError(f"Non-finite value for {self}")
        return value

    def diff(self, var: str) -> "ScalarExpr":
        return ScalarExpr(sympy.diff(self.tree, symbol(var)))

    def __str__(self) -> str:
        return to_text(self.tree)


def parse(text: str) -> ScalarExpr:
    """Parse grammar text into a ScalarExpr."""
    return ScalarExpr.parse(text)


def evaluate(e: ScalarExpr, point: Mapping[str, float]) -> float:
    return e.evaluate(point)


def diff(e: ScalarExpr, var: str) -> ScalarExpr:
    """Exact partial derivative."""
    return e.diff(var)


# ── Chart ───────────────────────────────────────────────

@dataclass(frozen=True)
class Chart:
    """Coordinate chart: ordered variable names and optional box bounds."""

    names: Tuple[str, ...]
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None
    symbols: Tuple[sympy.Symbol, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        from ..exceptions import ScenarioValidationError

        names = tuple(self.names)
        if not names:
            raise ScenarioValidationError("A chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ScenarioValidationError(f"Chart names must be distinct: {names}")
        for name in names:
            if not IDENT_RE.fullmatch(name):
                raise ScenarioValidationError(f"Invalid coordinate name {name!r}")
        object.__setattr__(self, "names", names)
        if self.bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(bounds) != len(names):
                raise ScenarioValidationError("One (lower, upper) pair per coordinate is required")
            if any(lo >= hi for lo, hi in bounds):
                raise ScenarioValidationError(f"Chart bounds must satisfy lower < upper: {bounds}")
            object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "symbols", tuple(symbol(n) for n in names))

    @property
    def dim(self) -> int:
        return len(self.names)

    def box(self) -> Tuple[Tuple[float, float], ...]:
        """Bounds, defaulting to the unit box."""
        return self.bounds if self.bounds is not None else tuple((0.0, 1.0) for _ in self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def contains(self, point: Sequence[float], slack: float = 1e-12) -> bool:
        if self.bounds is None:
            return True
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(point, self.bounds))

    @classmethod
    def standard(cls, m: int, prefix: str = "x") -> "Chart":
        return cls(tuple(f"{prefix}{i}" for i in range(1, m + 1)))


def point_map(names: Sequence[str], values: Sequence[float]) -> Dict[str, float]:
    return {name: float(v) for name, v in zip(names, values)}
