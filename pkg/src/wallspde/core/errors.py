"""Numerical error types shared by the domain and services layers."""


class GridMismatchError(ValueError):
    """Raised when two objects are defined on different circle grids."""


class WallViolationError(ValueError):
    """Raised when a field leaves the wall pair beyond the allowed tolerance."""


class SeedMismatchError(ValueError):
    """Raised when two simulations that must share a noise path do not."""


class NumericalBlowUpError(ArithmeticError):
    """Raised when a time step produces non-finite values."""


class OrderingViolationError(RuntimeError):
    """Raised when an ordered coupled pair loses its ordering."""


class InsufficientDataError(ValueError):
    """Raised when a statistic has no admissible samples."""
