"""Exception hierarchy shared across the package."""


class ProgenyError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ProgenyError):
    """An argument lies outside the mathematical domain of an operation."""


class EvaluationError(ProgenyError):
    """A rate expression produced a non-finite or otherwise invalid value."""


class ExprSyntaxError(ProgenyError):
    """Rate-expression text failed to parse.

    Attributes:
        offset: byte offset of the offending character in the source text.
        expected: tokens that would have been accepted at that position.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.offset = offset
        self.expected = expected


class SubcriticalModelError(DomainError):
    """The fluid population is non-increasing from the start (b(1) < d(1))."""


class BracketError(ProgenyError):
    """A bracketed root search failed to find a sign change."""


class QuadratureError(ProgenyError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class StiffnessError(ProgenyError):
    """The ODE integrator underflowed its step size."""


class EstimatorUndefinedError(ProgenyError):
    """An extinction estimator's anchor population is below one individual."""


class SimulationError(ProgenyError):
    """A stochastic replicate failed; carries the replicate index."""

    def __init__(self, message: str, replicate: int | None = None):
        super().__init__(message)
        self.replicate = replicate


class ConfigError(ProgenyError):
    """An experiment config failed to parse or validate.

    violations lists every problem found, not just the first.
    """

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []
