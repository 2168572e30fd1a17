class LatentGeometryError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(LatentGeometryError, ValueError):
    """Vector or array lengths do not match what the operation expects."""


class PreconditionError(LatentGeometryError, ValueError):
    """A point is off its manifold, a tangent vector is off its tangent space, or an input does not conform."""


class DomainError(LatentGeometryError, ValueError):
    """A coordinate transform was asked to map a point outside its domain."""


class ValidationError(LatentGeometryError, ValueError):
    """User input or a loaded artifact is malformed. The CLI maps this to exit code 2."""


class MissingConstantsError(LatentGeometryError, ValueError):
    """The embedding constants have not been computed."""


class ConvergenceError(LatentGeometryError, RuntimeError):
    """A quadrature or eigensolver did not reach the required accuracy."""


class FactorizationError(LatentGeometryError, RuntimeError):
    """A Gaussian-process system could not be factorized even with jitter."""
