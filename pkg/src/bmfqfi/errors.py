"""Exception types raised by the simulation tiers and the CLI."""


class BmfqfiError(Exception):
    """Base class for all package errors."""


class ParameterError(BmfqfiError, ValueError):
    """Invalid model or drive parameters."""


class DomainError(BmfqfiError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class DimensionError(BmfqfiError, ValueError):
    """State and operator sizes do not match."""


class DivergenceError(BmfqfiError, ArithmeticError):
    """A moment integration produced non-finite values.

    ``t`` is the end of the integration segment where it happened.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class StepSizeError(BmfqfiError, ArithmeticError):
    """Norm drift of a single integration step exceeded its bound."""

    def __init__(self, message, t=None, drift=None):
        super().__init__(message)
        self.t = t
        self.drift = drift


class IntegratorError(BmfqfiError, ArithmeticError):
    """Conserved quantity violated beyond tolerance."""


class GridError(BmfqfiError, ValueError):
    """Mismatched or non-monotone sample grids."""


class FitError(BmfqfiError, ValueError):
    """Degenerate input to a least-squares fit."""


class ConfigError(BmfqfiError, ValueError):
    """Bad run configuration (unknown key, wrong type, out of range)."""
