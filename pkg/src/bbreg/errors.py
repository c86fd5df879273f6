"""Exception types shared across the package."""


class BBRegError(Exception):
    """Base class for all package errors."""


class RingMismatch(BBRegError, ValueError):
    """Operands live in different coefficient rings."""


class NonUnit(BBRegError, ArithmeticError):
    """Attempted to invert an element of positive valuation."""


class NonInvertibleDenominator(NonUnit):
    """A normalising denominator (such as a power of a prime) is not a unit."""


class InsufficientValuation(BBRegError, ArithmeticError):
    """Exact division by p^t requested for an element of smaller valuation."""


class DimensionMismatch(BBRegError, ValueError):
    """Vector or matrix shapes do not agree."""


class SizeCapExceeded(BBRegError, ValueError):
    """A dense computation would exceed the configured size cap."""


class NotInFiltrationLevel(BBRegError, ValueError):
    """An element was expected to lie in I^r but does not."""


class DepthExceeded(BBRegError, ValueError):
    """A graded product needs a filtration level beyond the computed depth."""


class NotFixed(BBRegError, ValueError):
    """An element expected to be invariant under a group is not."""


class DivisibilityViolated(BBRegError, ValueError):
    """Integer divisibility preconditions are not met."""


class IndexNotInvertible(BBRegError, ArithmeticError):
    """A lattice index is divisible by p and cannot be divided out."""


class SchemaError(BBRegError, ValueError):
    """Input data does not match the expected JSON schema."""


class MissingCoefficients(SchemaError):
    """Newform coefficient data has gaps in 1..bound."""


class NetworkError(BBRegError, OSError):
    """Remote coefficient data could not be retrieved."""
