"""Exception hierarchy shared across the package."""


class SysInterpError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SysInterpError, ValueError):
    pass


class NumericalFailureError(SysInterpError, ArithmeticError):
    pass


class InconsistentSystemError(NumericalFailureError):
    """A per-segment linear system has no solution within tolerance."""


class NoInterpolatingModelError(NumericalFailureError):
    """No discrete-time model exists for the requested sampling time and degree."""


class UnsupportedRegionError(SysInterpError, TypeError):
    pass
