"""Exception types shared across modules."""


class DomainError(ValueError):
    """An argument lies outside the supported or convergent domain."""


class BudgetError(RuntimeError):
    """A Monte Carlo budget was too small for the requested precision."""


class TruncationWarning(UserWarning):
    """A truncated series left a tail larger than its tolerance."""


class QuadratureError(RuntimeError):
    """A quadrature grid failed its self-check."""
