"""Exception types shared across the package."""


class JosephyError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(JosephyError, ValueError):
    pass


class SingularMatrix(JosephyError, ArithmeticError):
    pass


class UnknownProblem(JosephyError, KeyError):
    pass


class NoSolution(JosephyError):
    """No branch pattern yields a feasible solution of the linearized inclusion."""


class ZeroDerivative(JosephyError, ZeroDivisionError):
    pass


class NotAdmissible(JosephyError, ValueError):
    """Majorant parameters violate the eta threshold."""
