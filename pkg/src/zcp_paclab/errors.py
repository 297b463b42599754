"""Exception types shared across the package."""

__all__ = ["ValidationError", "NumericalError"]


class ValidationError(ValueError):
    """Raised when inputs or configuration violate a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot meet its accuracy contract."""
