"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """Invalid argument: bad shape, rank out of range, unknown mode."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-convergence, non-finite output)."""


class Dtf1Error(OSError):
    """Malformed or unreadable DTF1 tensor file."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
