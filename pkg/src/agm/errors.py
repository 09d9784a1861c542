"""Exception types shared across the package."""

from __future__ import annotations


class AgmError(Exception):
    """Base class for all errors raised by this package."""


class GraphFormatError(AgmError):
    """Malformed graph input (bad token, bad header, count mismatch).

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(AgmError):
    """A structural invariant does not hold (offsets, targets, weights...)."""


class ParameterError(AgmError):
    """An argument violates an operation's preconditions."""


class SchemaError(AgmError):
    """A workitem does not conform to the instance schema."""


class OrderingViolationError(AgmError):
    """Strict mode: a processing function produced a workitem ordered before
    the equivalence class currently being drained."""
