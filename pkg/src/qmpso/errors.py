"""Shared exception types.

Everything user-facing raises one of these (or a plain ValueError for
argument validation that needs no special handling by callers).
"""


class ShapeError(ValueError):
    """Tensor extents do not line up for the requested operation."""


class NumericError(ValueError):
    """Non-finite values (nan/inf) where finite numbers are required."""


class ValidationError(ValueError):
    """Input violates a mathematical precondition (e.g. not Hermitian)."""


class CapabilityError(RuntimeError):
    """Request exceeds a declared resource bound (dense-size limit,
    bond budget too small for an exact evaluation, ...)."""


class CircuitFormatError(ValueError):
    """Circuit JSON does not conform to the interchange schema."""
