"""Exception types shared across the library, service and CLI."""


class MatrixFormatError(ValueError):
    """Raised when matrix input cannot be parsed or violates basic bounds."""


class UnsupportedAlphabetError(MatrixFormatError):
    """Raised when a matrix uses more than 2**16 distinct symbols."""


class InconclusiveError(RuntimeError):
    """Raised when an exact search exceeds its node budget.

    The caller learns that no answer was produced; a budget overrun is
    never converted into a wrong answer.
    """


class InvalidAttractorError(ValueError):
    """Raised when an operation requires a valid attractor and got none."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class TreeFormatError(ValueError):
    """Raised on bad magic, bad version or truncation of a serialized tree."""
