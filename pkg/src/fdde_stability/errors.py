"""Exception hierarchy shared across the package."""


class FDDEError(Exception):
    """Base class for all package errors."""


class DomainError(FDDEError, ValueError):
    """A closed-form expression was evaluated outside its domain."""


class PreconditionError(FDDEError, ValueError):
    """An operation was called with inputs violating its precondition."""


class DelayGridMisaligned(FDDEError, ValueError):
    """A delay is not an integer multiple of the step size."""


class HistoryDomainTooShort(FDDEError, ValueError):
    """A tabulated history does not cover the full delay interval."""


class NonFiniteState(FDDEError, ArithmeticError):
    """The integrator produced NaN."""


class TrajectoryTooShort(FDDEError, ValueError):
    """A trajectory is too short to support an empirical verdict."""


class BranchPointError(FDDEError, ValueError):
    """The characteristic function was evaluated at the branch point 0."""


class ContourRootError(FDDEError, RuntimeError):
    """A root sits on the argument-principle contour and perturbation failed."""
