"""Exception types shared across the package."""


class ModularAEError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ModularAEError):
    """Invalid argument, shape, document, or domain-object state."""


class DataError(ValidationError):
    """Malformed input data: ragged CSV rows, non-numeric cells, empty files."""


class NumericalError(ModularAEError):
    """Numerical failure: rank-deficient data, diverging descent, eigensolver breakdown."""
