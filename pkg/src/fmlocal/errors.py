"""Exception types shared across the package."""


class FmlocalError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(FmlocalError, ValueError):
    """A value violates a structural invariant."""


class VocabularyMismatchError(FmlocalError, ValueError):
    """Two structures were expected to share a vocabulary but do not."""


class StructureParseError(FmlocalError, ValueError):
    """Syntax or consistency error in a structure file."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


class FormulaParseError(FmlocalError, ValueError):
    """Syntax or consistency error in a formula."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"offset {position}: {message}")
        self.reason = message
        self.position = position


class BoundExceededError(FmlocalError, RuntimeError):
    """A configured search, size, or canonicalization bound was exceeded."""


class EnumerationTruncatedError(BoundExceededError):
    """An exhaustive enumeration hit its element limit before finishing."""


class InconclusiveError(FmlocalError, RuntimeError):
    """A bounded search finished without settling the answer either way."""


class InvalidSeedError(ValidationError):
    """A game seed that was required to be a partial homomorphism is not one."""
