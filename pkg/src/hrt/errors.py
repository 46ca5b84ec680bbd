"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems (DimensionError,
ConfigError, DataFormatError) exit 1, numeric failures (NumericError) exit 2.
"""


class DimensionError(ValueError):
    """Tensor extents do not line up for the requested operation."""


class NumericError(ArithmeticError):
    """A computation produced (or was handed) a non-finite value."""


class ConfigError(ValueError):
    """An experiment or dataset configuration is invalid."""


class DataFormatError(ValueError):
    """A dataset directory or checkpoint violates its declared format."""
