"""Exception types shared by every subpackage."""


class SteklovError(Exception):
    """Base class for toolkit errors."""

    exit_code = 1


class PolygonDataError(SteklovError, ValueError):
    """Input data violates a precondition or realizes no polygon."""

    exit_code = 2


class IndeterminateError(SteklovError):
    """A floating-point decision could not be certified within tolerance."""

    exit_code = 3


class NumericalError(SteklovError, ArithmeticError):
    """A solver, factorization or internal cross-check failed."""

    exit_code = 4
