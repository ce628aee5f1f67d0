"""Exception types shared across the package."""


class FlowentError(Exception):
    """Base class for all package-specific errors."""


class NotPrime(FlowentError):
    """A claimed prime characteristic is composite."""


class Reducible(FlowentError):
    """A defining modulus factors over its base field."""


class Mismatch(FlowentError):
    """Embeddings were composed across different fields."""


class FieldMismatch(FlowentError):
    """Operands live over different fields."""


class DimensionMismatch(FlowentError):
    """Operand shapes are incompatible."""


class NotContained(FlowentError):
    """A claimed subspace inclusion does not hold."""


class WindowTooSmall(FlowentError):
    """A truncation window cannot satisfy its exactness bound."""


class TooLarge(FlowentError):
    """A brute-force enumeration would exceed its size cap."""


class NotInvertible(FlowentError):
    """A matrix that must be invertible is singular."""
