"""Shared exception types.

The CLI maps these onto exit codes: configuration problems exit with 2,
dimension-cap overflows with 3, failed numerical consistency checks with 4.
"""


class ErrfiltError(Exception):
    """Base class for all library errors."""


class ConfigError(ErrfiltError):
    """Invalid run configuration or parameter value."""


class DimensionCapError(ErrfiltError):
    """Composite Hilbert-space dimension exceeds the configured cap."""


class NumericalCheckError(ErrfiltError):
    """A numerical consistency check (isometry, hermiticity, ...) failed."""
