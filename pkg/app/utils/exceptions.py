from builtins import ValueError


class LabError(ValueError):
    """Base class for every error raised by the laboratory."""


class InvalidDimensionError(LabError):
    """A dimension is zero, negative, or otherwise impossible."""


class DimensionMismatchError(LabError):
    """Two objects that must agree in dimension do not."""


class PreconditionError(LabError):
    """An argument lies outside the range where the quantity is defined."""


class UnsupportedDimensionError(LabError):
    """The dimension is valid but too large for the requested method."""


class ConstructionError(LabError):
    """A net or subspace could not be built within its guaranteed limits."""


class InvalidStateError(LabError):
    """A matrix is not a density matrix (or a vector is not a unit ket)."""


class ConfigError(LabError):
    """An experiment configuration is incomplete or inconsistent."""
