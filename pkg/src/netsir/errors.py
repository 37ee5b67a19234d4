"""Exception types shared across the package."""


class NetsirError(Exception):
    """Base class for all domain errors."""


class DimensionMismatch(NetsirError):
    """Vector or matrix sizes are inconsistent with the node count."""


class OutOfSimplex(NetsirError):
    """State violates 0 <= x, 0 <= y, x + y <= 1 by more than the clamp slack."""


class NotRankOne(NetsirError):
    """Operation needs rank-1 interaction structure and the matrix has none."""


class ZeroMatrix(NetsirError):
    """Interaction matrix has no positive entry."""


class StepSizeUnderflow(NetsirError):
    """Adaptive integrator cannot meet the error tolerance."""


class NoSignChange(NetsirError):
    """Event refinement was asked to bisect a bracket without a sign change."""


class DomainExcluded(NetsirError):
    """Limit map is undefined: y = 0 with xtilde >= gamma."""


class SupercriticalityRequired(NetsirError):
    """Threshold computation needs beta > gamma."""


class NotSpecialForm(NetsirError):
    """Operation needs the uniform-susceptibility form a = beta * 1."""


class SubcriticalAggregate(NetsirError):
    """Peak bound needs beta * xbar(0) > gamma."""


class NoConvergence(NetsirError):
    """Iteration hit its cap before reaching the requested tolerance."""


class NonpositiveSusceptibles(NetsirError):
    """Scalar invariant needs x > 0 for the logarithm."""


class InvalidInitialState(NetsirError):
    """Scalar final-size equation needs x0 > 0 and y0 >= 0."""


class ScenarioError(NetsirError):
    """Scenario or sweep file is malformed."""
