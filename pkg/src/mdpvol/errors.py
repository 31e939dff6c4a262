"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or argument lies outside its mathematical domain."""


class GridMismatchError(ValueError):
    """Two discretized paths do not share the same time grid."""


class QuadratureError(RuntimeError):
    """A quadrature failed to converge on the truncated domain."""


class GrowthError(QuadratureError):
    """An integrand or solution exceeds its declared polynomial growth budget."""


class UnsupportedModelError(ValueError):
    """The requested computation is not available for this model family."""


class SingularSystemError(RuntimeError):
    """A linear system that should be positive definite is numerically singular."""


class SimulationOverflowError(RuntimeError):
    """A simulated path crossed the overflow guard; the batch was aborted."""


class ConfigError(ValueError):
    """Configuration failed to parse or validate.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
