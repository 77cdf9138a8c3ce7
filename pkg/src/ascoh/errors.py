"""Shared exception types for the ascoh package."""


class AscohError(Exception):
    """Base class for all package-specific errors."""


class PrecisionExhausted(AscohError):
    """A series operation would produce a result with no known coefficients,
    or a required coefficient lies beyond the known precision."""


class OddExponentInSqrt(AscohError):
    """Square root of a Laurent series with a nonzero coefficient at an odd
    exponent (no square root exists in characteristic 2)."""


class NotSecondKind(AscohError):
    """A local differential has a nonzero coefficient at an odd negative
    exponent, so no local antiderivative tail exists."""


class NoRoot(AscohError):
    """The equation c^2 + c = a has no solution in the working field."""


class FieldTooSmall(AscohError):
    """A place over the requested point is not rational over GF(2^m).

    Carries ``suggested_m``, a field degree large enough to proceed.
    """

    def __init__(self, message, suggested_m=None):
        super().__init__(message)
        self.suggested_m = suggested_m


class PoleBoundExceeded(AscohError):
    """An input differential or tail does not fit inside the pole bounds of
    the finite-dimensional cohomology model; rebuild with a larger bound."""


class UnsupportedDivisor(AscohError):
    """A divisor has support outside the designated bad locus."""


class InterpolationGap(AscohError):
    """The dimension profile between consecutive canonical-filtration steps
    is neither constant nor of full slope."""


class NotAChain(AscohError):
    """The canonical-filtration closure failed to be totally ordered."""


class DimensionMismatch(AscohError):
    """An internally computed dimension disagrees with the theoretical value
    (indicates a bug, not a user error)."""


class ConfigError(AscohError):
    """Malformed curve configuration or CLI input."""
