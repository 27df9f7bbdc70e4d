"""Exception hierarchy shared by all modules."""


class HeatChainError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(HeatChainError, ValueError):
    pass


class MissingField(ConfigError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class UnknownSpectralKind(ConfigError):
    pass


class NegativeFrequency(HeatChainError, ValueError):
    pass


class NegativeEigenvalue(HeatChainError, ArithmeticError):
    """The effective potential matrix is not positive definite."""


class DomainError(HeatChainError, ValueError):
    pass


class NumericalError(HeatChainError, ArithmeticError):
    """Base for failures of a numerical procedure (mapped to exit code 3)."""


class QuadratureFailure(NumericalError):
    pass


class ToleranceNotMet(QuadratureFailure):
    """Adaptive integration stopped before reaching the requested accuracy.

    The best available estimate and its error are attached so callers may
    decide to accept a degraded result.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class NonFiniteIntegrand(QuadratureFailure):
    pass


class SingularMatrix(NumericalError):
    pass


class PhysicalityViolation(NumericalError):
    pass


class NonPhysical(HeatChainError, ValueError):
    pass


class SingularSum(NumericalError):
    pass


class BudgetExhausted(NumericalError):
    pass


class StationarityError(NumericalError):
    """Configuration has a bound mode or violates the cutoff condition."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
