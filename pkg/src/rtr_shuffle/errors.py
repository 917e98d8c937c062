"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments supplied by the caller."""


class NumericalError(RuntimeError):
    """An iterative method failed to converge."""


class ResourceError(RuntimeError):
    """A computation would exceed the configured size guard."""
