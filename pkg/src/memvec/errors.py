"""Exception hierarchy shared across the package."""


class MemvecError(Exception):
    """Base class for all package-specific errors."""


class NormalizationError(MemvecError):
    """Vector cannot be normalized (zero norm or non-finite entries)."""


class DimensionError(MemvecError):
    """Operands disagree on dimension, or a dimension is invalid."""


class DomainError(MemvecError):
    """Argument outside the mathematical domain of a function."""


class DegenerateCapError(DomainError):
    """Spherical cap with eta >= 1 has zero measure."""


class ModelError(MemvecError):
    """Inconsistent query model (e.g. H1 without a planted id)."""


class EmptyUnitError(MemvecError):
    """A memory unit must contain at least one member."""


class SingularGramError(MemvecError):
    """SPD factorization of the Gram matrix broke down."""


class FormatError(MemvecError):
    """Malformed binary file. Carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ModeError(MemvecError):
    """Unknown mode tag for a binary search operation."""
