"""Exception types raised by the numerical and combinatorial routines."""


class LogRSError(Exception):
    """Base class for every failure reported by the toolkit."""


# numerics
class DegreeZero(LogRSError):
    pass


class IllConditioned(LogRSError):
    pass


class QuadratureFailure(LogRSError):
    pass


class OverflowGuard(LogRSError):
    pass


# lifting
class NoGenericPoint(LogRSError):
    pass


class StepCollapse(LogRSError):
    pass


class BudgetExceeded(LogRSError):
    pass


class FiberEnumerationIncomplete(UserWarning):
    """Emitted (not raised) when the sheet window cuts off an infinite fiber."""


# skeleton
class GenericityViolation(LogRSError):
    pass


class InconsistentSides(LogRSError):
    pass


class RadiusTooSmall(LogRSError):
    pass


# geometry
class OutOfWindow(LogRSError):
    pass


class InfiniteRamificationSet(LogRSError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# uniformize
class TailNotConverged(LogRSError):
    pass


class SingularJacobian(LogRSError):
    pass


class NoConvergence(LogRSError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
