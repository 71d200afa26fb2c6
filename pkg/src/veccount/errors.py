"""Exception types shared across the package."""

from __future__ import annotations


class VeccountError(Exception):
    """Base class for all package-specific errors."""


class MalformedCode(VeccountError, ValueError):
    """A symbol string is not a valid integer code at the given position."""


class ArityMismatch(VeccountError, ValueError):
    """A symbol string holds a different number of codes than requested."""


class InvalidParam(VeccountError, ValueError):
    """A parameter is outside its documented domain."""


class BadCoordinate(VeccountError, IndexError):
    """A stream index is outside [1, d]."""


class StreamOverflow(VeccountError, RuntimeError):
    """More increments arrived than the counter was configured for."""


class CorruptState(VeccountError, ValueError):
    """A serialized counter snapshot failed validation."""


class EmptyR(VeccountError, ValueError):
    """A covering check was asked to use an empty estimate set."""


class StreamFileError(VeccountError, ValueError):
    """A stream file could not be parsed."""


class BudgetExceeded(VeccountError, RuntimeError):
    """State enumeration hit its node budget before finishing.

    Carries what was found so far: ``partial`` holds the estimate vectors
    reached before the budget ran out, and ``partial_result`` is always True
    so callers can distinguish this from an empty failure.
    """

    def __init__(self, message: str, partial: frozenset):
        super().__init__(message)
        self.partial = partial
        self.partial_result = True
