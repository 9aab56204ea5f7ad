"""Exception hierarchy shared by all modules."""


class BarrierBoundError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(BarrierBoundError, ValueError):
    """An argument lies outside the set where an operation is defined."""


class RangeError(DomainError):
    """A target value is outside the range of a monotone map."""


class ParameterError(BarrierBoundError, ValueError):
    """A scalar parameter violates a precondition (e.g. ``c <= c_u``)."""


class ConstructionError(BarrierBoundError):
    """A barrier or field could not be constructed."""


class MonotonicityError(ConstructionError):
    """A barrier lost strict monotonicity during integration."""

    def __init__(self, message, z_fail=None):
        super().__init__(message)
        self.z_fail = z_fail


class InvalidWarpError(ConstructionError):
    """The warp factor violates ``(rho'/rho)' > 0`` on the requested interval."""


class ConvergenceError(ConstructionError):
    """An iterative solver ran out of budget above its tolerance."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class EllipticityError(ConstructionError):
    """The equation lost ellipticity on the encountered gradient range."""


class ConvexityError(BarrierBoundError, ValueError):
    """A Minkowski norm is degenerate or not convex along a sampled direction."""


class ConfigError(BarrierBoundError, ValueError):
    """A scenario configuration failed to parse or validate."""


class CoverageWarning(UserWarning):
    """A barrier family member did not cover the requested value range."""
