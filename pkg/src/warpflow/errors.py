"""Exception hierarchy.

Every error carries ``where``, the ``module.operation`` that raised it, and
prefixes it to the message so CLI reports can name the failing call.
"""


class WarpflowError(Exception):
    """Base class for all library errors."""

    def __init__(self, message, where=None):
        self.where = where
        self.detail = message
        prefix = f"[{where}] " if where else ""
        super().__init__(f"{prefix}{type(self).__name__}: {message}")


class ValidationError(WarpflowError):
    """Bad input; the CLI maps these to exit status 1."""


class NumericalFailure(WarpflowError):
    """Solver breakdown; the CLI maps these to exit status 2."""


class PoleError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class PositivityError(ValidationError):
    pass


class UnknownScenario(ValidationError):
    pass


class IncompleteScenario(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class UnsupportedModel(ValidationError):
    pass


class NonParabolic(ValidationError):
    pass


class DeltaViolation(ValidationError):
    pass


class HypothesisViolation(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NoSolution(WarpflowError):
    """Profiles do not solve the ansatz system for any constants."""

    def __init__(self, message, residual, where=None):
        self.residual = residual
        super().__init__(message, where)


class DegenerateFit(WarpflowError):
    pass


class CFLViolation(NumericalFailure):
    pass


class FloorBreach(NumericalFailure):
    pass
