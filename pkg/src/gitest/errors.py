"""Shared exception types."""


class GitestError(ValueError):
    """Base class for all errors raised by this package."""


class StructuralError(GitestError):
    """A matrix or graph violates a structural contract (nonzero diagonal,
    mismatched dimensions, overlapping rank layers, ...)."""


class DegenerateDataError(GitestError):
    """The data admits no meaningful test (zero-distance similarity edge,
    fully degenerate null covariance, ...)."""
