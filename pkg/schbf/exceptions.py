"""Error types raised by the schbf package."""


class SchbfError(Exception):
    """Base class for every error raised by schbf."""


class DimensionError(SchbfError, ValueError):
    """Array shapes do not fit together."""


class SingularMatrixError(SchbfError, ArithmeticError):
    """A matrix is singular to working precision."""


class ConfigurationError(SchbfError, ValueError):
    """An experiment, system or link configuration is invalid."""


class FramingError(SchbfError, ValueError):
    """A bit payload cannot be split into whole symbols."""


class UndefinedMetricError(SchbfError, ArithmeticError):
    """A metric is undefined for its input (e.g. PAPR of a zero block)."""
