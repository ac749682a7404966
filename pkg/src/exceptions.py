"""
Custom exception hierarchy for the superconnection verifier.

All domain-specific errors inherit from SCTError so the CLI can catch them
with a single handler and turn them into the documented exit codes.
"""

from typing import Optional


class SCTError(Exception):
    """Base error; every custom exception inherits from this."""

    exit_code: int = 3
    detail: str = "An unexpected error occurred."

    def __init__(self, detail: Optional[str] = None, *, exit_code: Optional[int] = None):
        self.detail = detail or self.__class__.detail
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self.detail)


# ── Configuration errors ──

class ScenarioError(SCTError):
    """Raised when a scenario file cannot be read or decoded."""
    exit_code = 2
    detail = "Scenario file could not be loaded."


class ScenarioValidationError(ScenarioError):
    """Raised when a scenario is well-formed JSON but inconsistent."""
    detail = "Scenario failed validation."


class QuadratureConfigError(SCTError):
    """Raised for non-positive step counts or Gauss orders."""
    exit_code = 2
    detail = "Quadrature configuration is invalid."


# ── Expression errors ──

class ExprSyntaxError(SCTError):
    """Raised when an expression string does not match the grammar."""
    exit_code = 2
    detail = "Expression syntax error."

    def __init__(self, detail: Optional[str] = None, *, position: int = 0):
        self.position = position
        super().__init__(f"{detail or self.__class__.detail} at offset {position}")


class UnknownIdentifierError(ExprSyntaxError):
    """Raised when an identifier is neither a coordinate nor a supported function."""
    detail = "Unknown identifier"


# ── Evaluation errors ──

class EvaluationError(SCTError):
    """Raised when a numeric evaluation fails."""
    detail = "Evaluation failed."


class UnboundVariableError(EvaluationError):
    """Raised when a free variable has no value at evaluation time."""
    detail = "Unbound variable."


class DivisionByZeroError(EvaluationError):
    """Raised when an expression hits a pole."""
    detail = "Division by zero."


class NonConvergenceError(EvaluationError):
    """Raised when the iterated-integral series needs too many terms."""
    detail = "Series did not reach the requested tolerance."


# ── Algebra errors ──

class DimensionMismatchError(SCTError):
    """Raised when graded endomorphisms live on different graded spaces."""
    detail = "Graded dimensions do not match."


class ShapeMismatchError(SCTError):
    """Raised when a block or matrix has the wrong shape for its degree."""
    detail = "Block shape is inconsistent with the graded dimensions."


class ChartMismatchError(SCTError):
    """Raised when forms on different charts are combined."""
    detail = "Forms live on different charts."


class VariableClashError(SCTError):
    """Raised when a map's components use variables outside its source axes."""
    detail = "Map components reference variables outside the source axes."


class InverseCheckError(SCTError):
    """Raised when a supplied gauge inverse does not invert the gauge."""
    detail = "g * g_inv is not the identity."


# ── Geometry errors ──

class IndexRangeError(SCTError):
    """Raised for face or vertex indices out of range."""
    detail = "Index out of range."


class OutOfRangeError(SCTError):
    """Raised when a point lies outside the unit cube."""
    detail = "Point outside [0, 1]^k."


class FamilyError(SCTError):
    """Raised when a path family violates a precondition of a check."""
    detail = "Path family does not satisfy the check's precondition."


class IncompatibleWordsError(SCTError):
    """Raised when bar words do not share an endpoint vertex."""
    detail = "Bar words are not composable."
