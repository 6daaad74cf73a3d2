"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage/domain/shape problems -> 2,
file format problems -> 3, numerical failures -> 4.
"""


class VoxelXaiError(Exception):
    """Base class for all package errors."""


class DomainError(VoxelXaiError, ValueError):
    """An argument value is outside the operation's domain."""


class ShapeError(VoxelXaiError, ValueError):
    """Array dimensions do not match what the operation requires."""


class FormatError(VoxelXaiError, ValueError):
    """A serialized container (STL, NCF, VXG, ...) is malformed."""


class UsageError(VoxelXaiError, ValueError):
    """The API was called with an unknown method name or mismatched config."""


class NumericalError(VoxelXaiError, ArithmeticError):
    """A numerical procedure failed (e.g. singular normal matrix)."""
