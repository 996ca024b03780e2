"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class GridRangeError(DomainError):
    """A query falls outside a precomputed table; tables are never extrapolated."""


class VerificationError(RuntimeError):
    """A numerical consistency check failed."""
