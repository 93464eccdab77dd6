"""Exception types shared across the package."""


class SwrkitError(Exception):
    """Base class for errors raised by this package."""

    code = "error"


class FormatError(SwrkitError):
    """A file or payload does not match its declared binary/JSON layout."""

    code = "format"


class GridError(SwrkitError):
    """Grid or field invariant violated (shapes, bounds, sentinels)."""

    code = "grid"


class SnapError(SwrkitError):
    """A requested position cannot be snapped to a usable ocean cell."""

    code = "snap"


class UnreachableError(SwrkitError):
    """No path exists between the requested endpoints."""

    code = "unreachable"


class DegenerateAnomalyError(SwrkitError):
    """Anomaly correlation is undefined because an anomaly field has zero variance."""

    code = "degenerate-anomaly"


class TrainingDiverged(SwrkitError):
    """Training hit a non-finite loss.

    Carries the last finite weights so callers can keep the best usable state.
    """

    code = "training-diverged"

    def __init__(self, message, weights=None, step=None):
        super().__init__(message)
        self.weights = weights
        self.step = step


class LimitError(SwrkitError):
    """A hard count limit was reached (e.g. rehearsals per scenario)."""

    code = "limit"


class NotFoundError(SwrkitError):
    """A referenced object id does not exist in the store."""

    code = "not-found"
