"""Exception types shared across the package."""


class DescsysError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(DescsysError):
    """Malformed input: dimension mismatch, bad shape, or unparseable file."""


class RegularityError(DescsysError):
    """The pencil determinant vanishes identically, so no analysis applies."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IllConditionedError(DescsysError):
    """A decomposition step failed its internal residual bound."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotNilpotentError(DescsysError):
    """A matrix expected to be nilpotent is not, within tolerance."""


class DomainError(DescsysError):
    """Argument outside the mathematical domain of an operation."""


class SolvabilityError(DescsysError):
    """The requested closed-form solution does not exist for this system."""


class ConvergenceError(DescsysError):
    """A truncated series failed to converge within its term budget."""


class HorizonError(DescsysError):
    """The input signal is too short for the requested evaluation."""

    def __init__(self, message, required_index=None):
        super().__init__(message)
        self.required_index = required_index


class InconsistentICError(DescsysError):
    """Initial state lies off the solution manifold."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OracleInapplicable(DescsysError):
    """The requested cross-check cannot run on this system."""
