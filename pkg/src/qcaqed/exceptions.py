"""Exception types raised across the package.

All of them derive from :class:`ValidationError` (itself a ``ValueError``) so
callers, and the command line runner, can tell bad input apart from bugs.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class ViolationAboveTolerance(ValidationError):
    pass


class ThetaNonzeroForBoson(ValidationError):
    pass


class ZeroMomentum(ValidationError):
    pass


class GOutOfRange(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class PrecisionTooLow(ValidationError):
    pass


class NoConvergence(ArithmeticError):
    """Iterative solver hit its iteration cap; usually means too few digits."""


class NonPositiveValue(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class NegativeSqrt(ValidationError):
    pass


class DivisionByZero(ValidationError, ZeroDivisionError):
    pass
