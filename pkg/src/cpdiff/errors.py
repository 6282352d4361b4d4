"""Exception types. The CLI maps each class to an exit status."""


class CpdiffError(Exception):
    """Base class for package errors."""


class ValidationError(CpdiffError, ValueError):
    """Invalid input: bad parameters, mismatched dimensions, bad files."""


class ResourceCapError(CpdiffError):
    """A computation would exceed a configured size cap."""


class QuadratureError(CpdiffError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ToleranceError(CpdiffError):
    """A truncation bound cannot meet the requested tolerance within caps."""
