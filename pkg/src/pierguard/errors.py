"""Exception types shared across the package."""


class PierguardError(Exception):
    """Base class for all planning, search, and format errors."""


class FormatError(PierguardError):
    """Raised when a binary payload is malformed or truncated."""


class InvalidProblemError(PierguardError):
    """Raised when a planning problem violates its preconditions."""


class NoPathError(PierguardError):
    """Raised when a grid search exhausts the frontier without reaching the goal."""


class EmptyRegionError(PierguardError):
    """Raised when a heuristic region has no voxel at or above its threshold."""
