"""Exception and warning types raised across the package."""


class CanonDualError(Exception):
    """Base class for package errors."""


class DimensionError(CanonDualError, ValueError):
    pass


class DomainError(CanonDualError, ValueError):
    """A primal or dual argument fell outside a canonical function's domain."""


class SingularG(CanonDualError, ArithmeticError):
    """G is numerically singular, so the stationary x of the total complementarity
    function is not unique and the dual function is undefined there."""


class NoConvergence(CanonDualError):
    pass


class ActiveSetExplosion(CanonDualError):
    pass


class NoFeasiblePoint(CanonDualError):
    pass


class CertificationContradicted(CanonDualError):
    """The grid oracle found a feasible value below a certified global minimum."""


class SubproblemUncertified(UserWarning):
    """An augmented Lagrangian sub-problem had no certified global minimizer."""
