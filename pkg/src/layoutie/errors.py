"""Exception types shared across the package."""


class LayoutIEError(Exception):
    """Base class for all errors raised by this package."""


class SnapshotParseError(LayoutIEError):
    """Raised when a snapshot document is malformed or violates an invariant."""

    def __init__(self, message: str, *, context: str | None = None):
        self.context = context
        super().__init__(message if context is None else f"{context}: {message}")


class UnknownStringError(LayoutIEError):
    """Raised when a text lookup misses the site frequency table."""


class ShapeError(LayoutIEError):
    """Raised on tensor/parameter dimension mismatches."""


class TrainingError(LayoutIEError):
    """Raised when a training precondition does not hold (no data, no positives)."""


class PlanError(LayoutIEError):
    """Raised when an experiment plan violates its level constraints."""


class CheckpointError(LayoutIEError):
    """Raised when a model checkpoint cannot be read or fails validation."""
