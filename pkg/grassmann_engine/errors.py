"""
Exception hierarchy for the engine.
Everything derives from ValueError so callers that already guard bad input keep working.
"""

from typing import Optional


class GrassmannEngineError(ValueError):
    """Base class for every error raised by grassmann_engine."""


class DegenerateInputError(GrassmannEngineError):
    """Division by zero, zero section, zero argument where a nonzero one is required."""


class PoleError(DegenerateInputError):
    """A rational function was evaluated at a zero of its denominator."""

    def __init__(self, message: str, point: Optional[str] = None):
        super().__init__(message)
        self.point = point


class DegenerateMetricError(DegenerateInputError):
    """lambda^2 vanishes identically, so K, P and |B|^2 are undefined."""


class SpaceMismatchError(GrassmannEngineError):
    """Operands live in different weighted spaces or have incompatible dimensions."""


class WeightConflictError(SpaceMismatchError):
    """Two sections require different weights on the same coordinate."""


class DependentSectionsError(GrassmannEngineError):
    """Spanning sections are generically linearly dependent (singular Gram matrix)."""


class ReducibleImageError(GrassmannEngineError):
    """The e2 invariant of the d' image vanishes identically."""


class UnknownCaseError(GrassmannEngineError):
    """Catalog id not present in the expected-value table."""


class DslError(GrassmannEngineError):
    """
    Error in a .gsl script. Carries a 1-based line, 1-based column and the
    exclusive end column of the offending token span.
    """

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        end_column: Optional[int] = None,
        statement: Optional[int] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.end_column = end_column if end_column is not None else column + 1
        self.statement = statement
        super().__init__(f"{line}:{column}: {message}")


class DslLexError(DslError):
    """Unrecognized character sequence."""


class DslSyntaxError(DslError):
    """Token stream does not match the grammar."""


class DslBindingError(DslError):
    """Duplicate or undefined identifier."""


class DslElaborationError(DslError):
    """A well-formed script describes an invalid immersion."""
