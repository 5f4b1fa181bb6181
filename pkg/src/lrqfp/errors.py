class LrqfpError(Exception):
    """Base class for solver errors."""


class DenominatorZeroError(LrqfpError, ZeroDivisionError):
    pass


class MalformedInstanceError(LrqfpError, ValueError):
    pass


class DecompositionError(LrqfpError, ValueError):
    pass


class InfeasibleError(LrqfpError):
    pass


class UnboundedFeasibleSetError(LrqfpError):
    pass


class RegionCountOverflowError(LrqfpError):
    pass


class QPSolveError(LrqfpError):
    """The QP solver failed numerically on a problem that is not provably infeasible."""
