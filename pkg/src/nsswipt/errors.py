"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised for invalid scenario or solver parameters."""


class ShapeError(ValueError):
    """Raised when array dimensions are inconsistent."""


class DomainError(ValueError):
    """Raised when an argument lies outside a function's domain."""
