"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes distinct.
"""


class FiberLoopError(Exception):
    """Base class for all package errors."""


class DimensionError(FiberLoopError, ValueError):
    """Tensor extents, indices or sites are inconsistent."""


class DecompositionError(FiberLoopError, ArithmeticError):
    """A numerical factorization (SVD, eigendecomposition) did not converge."""


class ResourceCapError(FiberLoopError, MemoryError):
    """A configured memory or size cap would be exceeded."""


class ZeroProbabilityError(FiberLoopError, ValueError):
    """Conditioning on an event (or normalizing by a mean) that has zero weight."""


class ConfigError(FiberLoopError, ValueError):
    """A run configuration failed to parse or validate."""


class ZeroNormError(FiberLoopError, ValueError):
    """A state with zero norm where a normalized state is required."""
