"""Exception types shared across the package."""


class TlsDriveError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(TlsDriveError, ValueError):
    """A physical parameter violates its validity constraints."""


class ValidityError(TlsDriveError, ValueError):
    """A formula or sampler was invoked outside its regime of validity."""


class StabilityError(TlsDriveError, RuntimeError):
    """Integrator refused to run: the stability bound cannot be satisfied."""


class InvalidInputError(TlsDriveError, ValueError):
    """A spectrum/series argument is malformed for the requested operation."""


class DegenerateInputError(TlsDriveError, ValueError):
    """A ratio or fit is undefined because the reference quantity vanishes."""


class WeakDriveValidityWarning(UserWarning):
    """Raw redistribution ratio exceeds 1: weak-drive formula out of range."""
