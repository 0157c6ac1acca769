"""
Exception hierarchy for the transalgebraic topological recursion engine.

The CLI maps these onto exit codes; library code raises them after logging.
"""

from typing import Any, Optional


class TRError(Exception):
    """Base class for all engine errors."""


class CurveFileError(TRError, ValueError):
    """Raised when a curve description file cannot be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class InadmissibleCurveError(TRError, ValueError):
    """Raised when a curve fails the admissibility conditions."""


class ConjecturalContributionError(TRError, ValueError):
    """Raised when an essential-singularity contribution is only conjectural."""


class PrecisionError(TRError, ArithmeticError):
    """Raised when a truncated series is read past its guaranteed order."""

    def __init__(self, message: str, required_order: Optional[int] = None) -> None:
        self.required_order = required_order
        super().__init__(message)


class VerificationError(TRError):
    """Raised when an exact property check fails."""

    def __init__(self, message: str, witness: Any = None) -> None:
        self.witness = witness
        super().__init__(message)
