"""Exception hierarchy for aniso_lp."""


class AnisoLPError(Exception):
    """Base class for all errors raised by this package."""


class AdmissibilityError(AnisoLPError, ValueError):
    """The dilation matrix violates <Px, x> >= <x, x>."""


class DomainError(AnisoLPError, ValueError):
    """An argument lies outside the domain of the operation."""


class RangeError(DomainError):
    """A smoothness index lies outside the range of a norm-equivalence claim."""


class ShapeError(AnisoLPError, ValueError):
    """Array shape does not match the grid it is paired with."""


class ConvergenceError(AnisoLPError, RuntimeError):
    """An iterative solver ran out of iterations."""


class NormalizationError(AnisoLPError, ValueError):
    pass


class NonFiniteSymbolError(AnisoLPError, ValueError):
    pass


class MeanNotZeroError(AnisoLPError, ValueError):
    """A negative-order potential was applied to a field with nonzero mean."""


class DegenerateSymbolError(AnisoLPError, ValueError):
    """A multiplier (nearly) vanishes on the unit shell and cannot be inverted."""


class ApproximantTooFarError(AnisoLPError, ValueError):
    pass


class QuadratureCoverageError(AnisoLPError, RuntimeError):
    """The scale quadrature misses more than the allowed share of the integral."""


class SingularWeightError(AnisoLPError, ValueError):
    pass


class ConfigError(AnisoLPError, ValueError):
    pass
