"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input data or configuration (CLI exit code 2)."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to converge (CLI exit code 3)."""
