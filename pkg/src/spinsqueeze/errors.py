"""Exception types raised by the witness library."""


class SpinSqueezeError(Exception):
    """Base class for all library errors."""


class DomainError(SpinSqueezeError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DegenerateInput(SpinSqueezeError, ZeroDivisionError):
    """A coefficient is undefined, e.g. the polarization in a denominator vanishes."""


class DimensionError(SpinSqueezeError, ValueError):
    """Wrong number of modes for the requested criterion."""


class SizeError(SpinSqueezeError, ValueError):
    """Problem too large for exhaustive enumeration."""


class NonConvergence(SpinSqueezeError, ArithmeticError):
    """An iterative numerical routine hit its iteration cap or lost an invariant."""


class ConsistencyError(SpinSqueezeError, ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""
