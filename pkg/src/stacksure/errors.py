"""Exception types shared across the package."""


class StacksureError(Exception):
    """Base class for package-specific errors."""


class UndefinedAUCError(StacksureError, ValueError):
    """AUC requested for a score vector whose labels contain a single class."""


class NotPositiveDefiniteError(StacksureError, ValueError):
    """Cholesky factorization hit a non-positive pivot."""


class IterationCapError(StacksureError, RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the last iterate so callers can decide whether the partial
    result is usable (e.g. logistic weights diverging on separable data).
    """

    def __init__(self, message, weights=None, intercept=None):
        super().__init__(message)
        self.weights = weights
        self.intercept = intercept


class OracleUnavailableError(StacksureError, ValueError):
    """New-data evaluation requested for a dataset without a known generator."""


class ConfigError(StacksureError, ValueError):
    """Invalid experiment configuration."""


class DataFormatError(StacksureError, ValueError):
    """Malformed input data file."""
