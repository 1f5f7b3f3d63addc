"""Exception types shared across the package."""


class EmlabError(Exception):
    """Base class for all package errors."""


class ConstraintViolation(EmlabError):
    """A field or state violates a structural constraint (zero mode, Gauss law, ...)."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals) if residuals else {}


class ConfigError(EmlabError):
    """Invalid or unknown configuration key/value."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class CostGuardError(EmlabError):
    """An operation was refused because it would be too expensive at this size."""


class QuadratureError(EmlabError):
    """An oscillatory quadrature failed to converge at the allowed resolution."""


class SnapshotFormatError(EmlabError):
    """A snapshot file is malformed, truncated, or incompatible."""
