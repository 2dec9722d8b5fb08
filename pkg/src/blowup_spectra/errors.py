"""Exception types shared by the numerical modules."""


class DomainError(ValueError):
    """Argument outside the interval where a formula is defined."""


class ResonanceError(ValueError):
    """Frobenius recurrence denominator vanishes (integer index collision)."""


class AccuracyError(RuntimeError):
    """A truncation or tolerance target cannot be met with the given resources."""


class ConvergenceError(RuntimeError):
    """An iteration failed to converge."""

    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


class ConditioningError(RuntimeError):
    """A matrix is too ill-conditioned for the requested operation."""


class ContourError(ValueError):
    """A contour passes too close to a zero or pole of the sampled function."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class CacheCorruptionError(RuntimeError):
    """A cache entry failed its integrity check."""


class InstabilityError(RuntimeError):
    """A time evolution grew faster than any admissible bound."""

    def __init__(self, msg, tau=None, growth=None):
        super().__init__(msg)
        self.tau = tau
        self.growth = growth
