"""Exception hierarchy shared by all gapsum modules."""


class GapsumError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GapsumError, ValueError):
    """An argument violates a documented precondition."""


class EmptyDomainError(ValidationError):
    """A limit is below the smallest value for which the quantity exists."""


class CapacityError(GapsumError):
    """A limit exceeds the supported 64-bit range or a documented memory cap."""


class PrecisionError(GapsumError):
    """A precision target cannot be certified by the numeric type in use."""


class UnsupportedExponentError(ValidationError):
    """Weight exponent outside the supported alpha >= -1 family."""


class CheckpointError(ValidationError):
    """A checkpoint file is corrupt, has the wrong version, or does not match the run configuration."""
