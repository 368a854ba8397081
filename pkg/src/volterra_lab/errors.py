class VolterraError(Exception):
    """Base class for all errors raised by volterra_lab."""


class DomainError(VolterraError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigurationError(VolterraError, ValueError):
    """Inconsistent or degenerate configuration (grids, thresholds, cases)."""


class EvaluationError(VolterraError, ArithmeticError):
    """A user-supplied function could not be evaluated."""
