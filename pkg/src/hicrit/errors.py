"""Exception hierarchy shared by all hicrit modules."""


class HicritError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(HicritError, ValueError):
    """An argument violates a documented precondition."""


class ValidationError(HicritError, ValueError):
    """A data file failed schema validation.

    Carries optional row/column context so CLI messages can point at the
    offending cell.
    """

    def __init__(self, message, *, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class CacheMissError(HicritError, LookupError):
    """A critical-value lookup failed under a cache-only policy."""


class FailureRegionError(InvalidInputError):
    """A phase-diagram query landed in the region of failure."""
