"""Exception hierarchy.

Every error carries an optional ``stage`` naming the pipeline step that
failed, so callers of :func:`fmee.pipeline.estimate_mee` can tell a bad
bandwidth from a bad tail estimate without parsing messages.
"""

from __future__ import annotations


class MEEError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class DimensionError(MEEError, ValueError):
    pass


class DomainError(MEEError, ValueError):
    """An argument lies outside the domain of the function."""


class LogDomainError(DomainError):
    """A logarithm or fractional power of a nonpositive quantity was needed."""


class ParameterError(MEEError, ValueError):
    pass


class EmptyNeighborhoodError(MEEError):
    """No observation falls in the kernel window around the covariate point."""


class DegenerateTailError(MEEError):
    pass


class InfiniteMeanError(MEEError):
    """Estimated or requested tail index is >= 1."""


class QuadratureError(MEEError):
    def __init__(self, message: str, *, error_estimate: float = float("nan"),
                 stage: str | None = None):
        super().__init__(message, stage=stage)
        self.error_estimate = error_estimate


class NumericError(MEEError, ArithmeticError):
    """NaN or infinite value produced where a finite one is required."""


class OptimizationError(MEEError):
    pass


class UnsupportedError(MEEError, NotImplementedError):
    pass


class ModelError(MEEError, ValueError):
    pass


class ParseError(MEEError, ValueError):
    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{', '.join(loc)}: {message}"
        super().__init__(message, stage="parse")
        self.line = line
        self.column = column
