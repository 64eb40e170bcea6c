"""Exception types shared across the toolkit."""


class FramelabError(Exception):
    """Base class for all framelab errors."""


class ConfigError(FramelabError):
    """Bad user-supplied configuration (specs, ladders, windows, files)."""


class DimensionMismatch(FramelabError):
    """Operands have incompatible shapes or ambient dimensions."""


class NotHermitian(FramelabError):
    """Matrix fails the Hermitian symmetry check."""


class NegativeEigenvalue(FramelabError):
    """A nominally PSD matrix has an eigenvalue below the tolerance floor."""


class BadWeight(FramelabError):
    """A weight formula produced a negative or non-finite value."""


class NotOrthonormal(FramelabError):
    """Subspace basis columns are not orthonormal within tolerance."""


class OutOfRange(FramelabError):
    """Vector lies outside the numerical range of the frame operator."""


class LowerBoundTooSmall(FramelabError):
    """Restricted lower frame bound does not clear the rank tolerance."""


class QuadratureUnderflow(FramelabError):
    """Density integration failed to meet the requested tolerance."""


class UnsupportedRealization(FramelabError):
    """Requested realization is invalid for this measure model."""


class NotUnitVector(FramelabError):
    """Kaczmarz direction is not unit-norm in L2(mu)."""


class HypothesisNotAsserted(FramelabError):
    """Caller did not assert the hypothesis class a criterion requires."""
