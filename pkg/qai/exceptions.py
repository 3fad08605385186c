"""
Custom exceptions for qai.

All exceptions inherit from ``QaiError`` to allow callers to catch
library-specific errors with a single base class.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from qai.lang import Diagnostic


class QaiError(Exception):
    """Base exception for qai."""


class ConfigurationError(QaiError):
    """Raised for invalid tolerance, loop-policy or environment settings."""


class SerializationError(QaiError):
    """Raised when a JSON document does not match its schema."""


# -- linear algebra ----------------------------------------------------------


class UnknownVariable(QaiError):
    """Raised when a qubit name is not part of the layout."""


class DimensionMismatch(QaiError):
    """Raised when operand shapes do not agree."""


class NotHermitian(QaiError):
    """Raised when a matrix expected to be Hermitian is not, within herm_tol."""


class NotPSD(QaiError):
    """Raised when a matrix expected to be positive semidefinite is not."""


class TraceTooLarge(QaiError):
    """Raised when a partial density operator has trace above 1 + trace_tol."""


# -- language ----------------------------------------------------------------


class ProgramSyntaxError(QaiError):
    """Raised by the parser on malformed program text."""

    def __init__(self, message: str, line: int, col: int, expected: str = "") -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.expected = expected


class ValidationError(QaiError):
    """Raised when a parsed program violates a well-formedness rule."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        lines = "; ".join(str(d) for d in diagnostics)
        super().__init__(f"{len(diagnostics)} validation error(s): {lines}")
        self.diagnostics = diagnostics


# -- semantics ---------------------------------------------------------------


class LoopBudgetExceeded(QaiError):
    """Raised when a while loop has not converged within the loop policy."""

    def __init__(self, message: str, partial: Any, accumulated_trace: float, residual: float) -> None:
        super().__init__(message)
        self.partial = partial  # State holding the truncated sum
        self.accumulated_trace = accumulated_trace
        self.residual = residual


class EmptySet(QaiError):
    """Raised when an operation needs at least one state."""


class ZeroState(QaiError):
    """Raised when a state cannot be normalized because its trace vanishes."""


class TraceNotOne(QaiError):
    """Raised when a normalized state is required."""


# -- domains and logic -------------------------------------------------------


class ShapeMismatch(QaiError):
    """Raised when abstract elements of different kinds or shapes are combined."""


class UnsupportedDomain(QaiError):
    """Raised when an operation is not available for the requested domain."""


class FixpointBudgetExceeded(QaiError):
    """Raised when the loop iteration exceeds the lattice height bound."""


class DerivationRejected(QaiError):
    """Raised when a derivation emitted by a checker fails replay."""
