"""
Tests for the qai.exceptions module.

Validates that all custom exceptions are defined, importable, and form the
correct inheritance hierarchy under ``QaiError``.
"""

import pytest

from qai.exceptions import (
    ConfigurationError,
    DerivationRejected,
    DimensionMismatch,
    EmptySet,
    FixpointBudgetExceeded,
    LoopBudgetExceeded,
    NotHermitian,
    NotPSD,
    ProgramSyntaxError,
    QaiError,
    SerializationError,
    ShapeMismatch,
    TraceNotOne,
    TraceTooLarge,
    UnknownVariable,
    UnsupportedDomain,
    ValidationError,
    ZeroState,
)
from qai.lang import Diagnostic, SourceLocation

ALL_ERRORS = [
    ConfigurationError,
    DerivationRejected,
    DimensionMismatch,
    EmptySet,
    FixpointBudgetExceeded,
    LoopBudgetExceeded,
    NotHermitian,
    NotPSD,
    ProgramSyntaxError,
    SerializationError,
    ShapeMismatch,
    TraceNotOne,
    TraceTooLarge,
    UnknownVariable,
    UnsupportedDomain,
    ValidationError,
    ZeroState,
]


class TestExceptionHierarchy:
    """All custom exceptions inherit from QaiError."""

    @pytest.mark.parametrize("exc", ALL_ERRORS, ids=lambda e: e.__name__)
    def test_is_subclass(self, exc: type) -> None:
        assert issubclass(exc, QaiError)

    def test_base_is_exception(self) -> None:
        assert issubclass(QaiError, Exception)


class TestStructuredErrors:
    """Errors carrying structured data keep it."""

    def test_syntax_error_position(self) -> None:
        err = ProgramSyntaxError("expected ';', found 'x'", 3, 7, "';'")
        assert (err.line, err.col, err.expected) == (3, 7, "';'")
        assert str(err).startswith("3:7:")

    def test_validation_error_keeps_all_diagnostics(self) -> None:
        diags = [
            Diagnostic("UnknownVariable", "unknown qubit 'r'", SourceLocation(2, 1)),
            Diagnostic("UnknownUnitary", "unknown unitary 'V'", None),
        ]
        err = ValidationError(diags)
        assert err.diagnostics == diags
        assert "2 validation error(s)" in str(err)
        assert "UnknownUnitary" in str(err)

    def test_loop_budget_carries_partial_result(self) -> None:
        err = LoopBudgetExceeded("loop", partial="partial", accumulated_trace=0.75, residual=0.25)
        assert err.partial == "partial"
        assert err.accumulated_trace == 0.75
        assert err.residual == 0.25

    def test_caught_by_base(self) -> None:
        with pytest.raises(QaiError, match="bad shape"):
            raise ShapeMismatch("bad shape")
