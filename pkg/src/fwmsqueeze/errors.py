"""Exception types raised across the package.

All of them derive from :class:`FwmSqueezeError` so the CLI can map any
contract violation to a nonzero exit status.
"""


class FwmSqueezeError(Exception):
    """Base class for every error raised by this package."""

    #: short module name reported by the CLI
    module = "fwmsqueeze"


class ArgumentError(FwmSqueezeError, ValueError):
    """An argument is outside the domain an operation accepts."""


class DomainError(ArgumentError):
    """A value cannot be represented in the requested unit (e.g. log of <= 0)."""


class RangeError(FwmSqueezeError, ValueError):
    """A requested abscissa lies outside the support of a sampled curve."""


class DataError(FwmSqueezeError, ValueError):
    """Input data violate an invariant (ordering, monotone grid, malformed row)."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NumericalError(FwmSqueezeError, ArithmeticError):
    """An integration produced a non-finite intermediate."""
