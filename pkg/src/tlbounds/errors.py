"""Exception types raised across the package."""


class TLBoundsError(ValueError):
    """Base class for all package errors."""


class GroundSetMismatchError(TLBoundsError):
    """Objects that must share a ground set do not."""


class PreconditionError(TLBoundsError):
    """An operation was called outside its domain of definition."""


class UnsupportedClassError(TLBoundsError):
    """The requested hypothesis-class construction is not available."""


class ResourceGuardError(TLBoundsError):
    """The request would exceed a deliberate computational limit."""


class ConfigError(TLBoundsError):
    """An experiment config is malformed or inconsistent."""
