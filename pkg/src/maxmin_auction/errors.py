"""Exception hierarchy shared across the package."""


class MaxminError(Exception):
    """Base class for all package errors."""


class DomainError(MaxminError, ValueError):
    """An input lies outside the mathematically valid domain."""


class ConvergenceError(MaxminError, RuntimeError):
    """An iterative routine exhausted its budget without meeting tolerance."""


class DegenerateError(MaxminError, RuntimeError):
    """The quadratic structure of the pointwise problem is invalid (concave)."""


class MonotonicityError(MaxminError, ValueError):
    """An input required to be nondecreasing is not."""


class MeanMismatchError(MaxminError, ValueError):
    """A supplied distribution does not have the required mean."""
