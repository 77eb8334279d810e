"""Exception types raised by the package."""


class InvalidInputError(ValueError):
    """Malformed simplex, distance matrix or argument."""


class InvalidMetricError(ValueError):
    """Distances that are not realizable by points in the stated dimension."""


class OutOfDomainError(ValueError):
    """Parameter outside the region where a closed form is defined."""
