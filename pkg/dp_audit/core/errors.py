"""
Exception hierarchy for the audit toolkit.

Every error raised on purpose by the package derives from AuditError and
from the builtin exception a caller would naturally catch.
"""

from typing import Optional


class AuditError(Exception):
    """Base class for all audit errors."""


class DomainError(AuditError, ValueError):
    """An argument lies outside the domain of the operation."""


class ShapeError(AuditError, ValueError):
    """Vector or matrix dimensions do not match."""


class NotSpdError(AuditError, ValueError):
    """A matrix failed symmetric positive definite validation."""

    def __init__(self, condition: str, detail: str) -> None:
        self.condition = condition
        super().__init__(f"matrix is not SPD ({condition}): {detail}")


class DegenerateExampleError(AuditError, ValueError):
    """An example has a zero quadratic form and no angular margin."""


class DegenerateGroupError(AuditError, ValueError):
    """A group referenced by a computation contains no examples."""


class CalibrationError(AuditError, RuntimeError):
    """Noise calibration could not find a feasible sigma."""


class ConfigurationError(AuditError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class DivergenceError(AuditError, RuntimeError):
    """An iterative procedure produced a non-finite value."""


class IngestionError(AuditError, ValueError):
    """A dataset file could not be read."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ) -> None:
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
