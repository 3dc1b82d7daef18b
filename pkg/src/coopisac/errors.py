"""Exception hierarchy shared by every module of the package."""


class CoopIsacError(Exception):
    """Base class for all package errors."""


class ScenarioError(CoopIsacError, ValueError):
    """Invalid scenario configuration."""


class RangeError(ScenarioError):
    """A scalar parameter is outside its admissible range."""


class ReachabilityError(ScenarioError):
    """An endpoint pair cannot be joined within the speed budget."""


class PairwiseError(ScenarioError):
    """Pinned positions already violate the minimum UAV separation."""


class ShapeError(CoopIsacError, ValueError):
    """Inconsistent array dimensions."""


class InfeasibleError(CoopIsacError):
    """An optimization subproblem has no feasible point."""


class DegenerateError(CoopIsacError, ArithmeticError):
    """A quantity that must be strictly positive is not."""


class SingularError(CoopIsacError, ArithmeticError):
    """Matrix is not positive definite."""


class ConvergenceError(CoopIsacError, RuntimeError):
    """Iterative kernel hit its iteration cap."""
