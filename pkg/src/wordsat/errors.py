"""Exception types shared across the package."""


class WordsatError(Exception):
    """Base class for all library errors."""


class DegreeMismatch(WordsatError, ValueError):
    pass


class CapExceeded(WordsatError):
    """An enumeration would exceed a configured size cap."""


class OracleTooLarge(CapExceeded):
    pass


class NotInGroup(WordsatError, ValueError):
    """Element is not a member; ``residue`` and ``level`` record where sifting stopped."""

    def __init__(self, message, residue=None, level=None):
        super().__init__(message)
        self.residue = residue
        self.level = level


class PreconditionError(WordsatError, ValueError):
    pass


class InvariantViolation(WordsatError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
