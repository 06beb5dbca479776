"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when caller-supplied data violates a precondition."""


class InternalError(RuntimeError):
    """Raised when an internal invariant is violated; indicates a bug."""
