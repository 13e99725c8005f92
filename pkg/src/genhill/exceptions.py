"""Exception hierarchy shared by every module of the package."""


class GenHillError(Exception):
    """Base class for all package errors."""


class DomainError(GenHillError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(GenHillError, ValueError):
    """An order-statistic index (usually ``k``) is out of range for the sample."""


class DegenerateError(GenHillError, ArithmeticError):
    """A statistic is undefined for the given data (for instance tied spacings)."""


class ConstructionError(GenHillError, ValueError):
    """A tail model could not be built with the requested parameters."""
