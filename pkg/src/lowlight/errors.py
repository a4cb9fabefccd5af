"""Exception types shared across the package.

All subclass ValueError so callers that do not care about the exact
failure mode can catch a single type; the CLI maps any of these to the
validation exit code.
"""


class DimensionError(ValueError):
    """Shapes, lengths, or channel counts do not match."""


class DomainError(ValueError):
    """A value lies outside its mathematically valid range."""


class SingularParameterError(DomainError):
    """A parameter makes the computation singular (e.g. division by zero)."""


class DegenerateGroundTruthError(ValueError):
    """Ground truth has no positive pixels, so recall is undefined."""


class EmptyDatasetError(ValueError):
    """An evaluation was requested over zero images."""


class InsufficientAnnotationsError(ValueError):
    """Consensus needs at least two annotator boxes."""
