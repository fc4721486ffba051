"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InfiniteLatencyError(ArithmeticError):
    """No secure delivery is possible (effective secure probability is zero)."""


class NoThresholdError(ValueError):
    """The payload is too small for a saturation threshold to exist (D ln2 <= 4)."""


class InfeasibleError(ValueError):
    """The blocklength constraint D < L < L_max admits no integer."""
