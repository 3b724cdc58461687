"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An input violates a documented precondition."""


class DegenerateRotation(ArithmeticError):
    """Rotation logarithm requested at (or too close to) the branch cut."""


class NumericFailure(ArithmeticError):
    """A numeric routine produced a non-finite value.

    ``where`` identifies the failing component (a gradient index, an
    optimizer kind, ...), so callers can report what blew up.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class InvalidInstance(ValueError):
    """A finite planning instance is malformed (e.g. unreachable state)."""
