"""Exception types shared across the package."""


class PermutonError(ValueError):
    """Base class for invalid input to any operation in this package."""


class TieError(PermutonError):
    """Ties in a coordinate under the strict tie policy."""


class BudgetError(PermutonError):
    """A brute-force enumeration or rejection sampler would exceed its budget."""
