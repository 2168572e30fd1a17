"""
Constant-curvature model spaces: the Euclidean plane, the hyperboloid and the
hypersphere, with their exponential maps and geodesic distances, plus the chain
of coordinate changes that takes the hyperboloid to the (R^2, g_-1) chart
(metric dx^2 + e^{2x} dy^2) consumed by the Blanusa embedding.

Ambient convention: hyperboloid points store the time-like coordinate FIRST,
x = (x_0, x_1, ..., x_d) with <x, x>_L = 1/K and x_0 > 0. The stereographic
projection to the Poincare disk is written for the time-like coordinate LAST,
so `to_time_last` is applied at that boundary and nowhere else.

All functions act on the last array axis and broadcast over leading axes.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..utils.errors import DimensionError, DomainError, PreconditionError

logger = logging.getLogger(__name__)

POINT_TOL = 1e-9
TANGENT_TOL = 1e-8
SERIES_CUTOFF = 1e-6


class SpaceKind(str, Enum):
    EUCLIDEAN = "E"
    HYPERBOLOID = "H"
    HYPERSPHERE = "S"

    @property
    def rank(self) -> int:
        """Position in the canonical factor order E < H < S."""
        return _KIND_ORDER.index(self)

    @classmethod
    def from_letter(cls, letter: str) -> "SpaceKind":
        try:
            return cls(letter.strip().upper())
        except ValueError:
            raise ValueError(f"Unknown model space letter '{letter}', expected one of E, H, S") from None


_KIND_ORDER = (SpaceKind.EUCLIDEAN, SpaceKind.HYPERBOLOID, SpaceKind.HYPERSPHERE)
_DEFAULT_CURVATURE = {SpaceKind.EUCLIDEAN: 0.0, SpaceKind.HYPERBOLOID: -1.0, SpaceKind.HYPERSPHERE: 1.0}


@dataclass(frozen=True)
class ModelSpace:
    kind: SpaceKind
    curvature: float
    dim: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"Model space dimension must be positive, got {self.dim}")
        if self.kind is SpaceKind.EUCLIDEAN and self.curvature != 0:
            raise ValueError(f"Euclidean space needs curvature 0, got {self.curvature}")
        if self.kind is SpaceKind.HYPERBOLOID and not self.curvature < 0:
            raise ValueError(f"Hyperboloid needs negative curvature, got {self.curvature}")
        if self.kind is SpaceKind.HYPERSPHERE and not self.curvature > 0:
            raise ValueError(f"Hypersphere needs positive curvature, got {self.curvature}")

    @classmethod
    def default(cls, kind: SpaceKind, dim: int = 2) -> "ModelSpace":
        """Unit-curvature instance (K in {-1, 0, +1}) of the given kind."""
        return cls(kind=kind, curvature=_DEFAULT_CURVATURE[kind], dim=dim)

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kind is SpaceKind.EUCLIDEAN else self.dim + 1

    @property
    def letter(self) -> str:
        return self.kind.value


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def lorentz_inner(x, y):
    """-x_1 y_1 + sum_{j>=2} x_j y_j over the last axis."""
    x = _as_array(x)
    y = _as_array(y)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionError(f"Lorentz inner product of vectors of length {x.shape[-1]} and {y.shape[-1]}")
    if x.shape[-1] < 2:
        raise DimensionError("Lorentz inner product needs vectors of length >= 2")
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def origin(space: ModelSpace) -> np.ndarray:
    """Base point used for projections: 0, the hyperboloid pole (1/sqrt(-K), 0, ...), the sphere pole (..., 0, 1/sqrt(K))."""
    point = np.zeros(space.ambient_dim)
    if space.kind is SpaceKind.HYPERBOLOID:
        point[0] = 1.0 / np.sqrt(-space.curvature)
    elif space.kind is SpaceKind.HYPERSPHERE:
        point[-1] = 1.0 / np.sqrt(space.curvature)
    return point


def _check_width(space: ModelSpace, x: np.ndarray, what: str):
    if x.shape[-1] != space.ambient_dim:
        raise DimensionError(f"{what} has {x.shape[-1]} coordinates, {space.letter}^{space.dim} needs {space.ambient_dim}")


def check_point(space: ModelSpace, x, tol: float = POINT_TOL) -> np.ndarray:
    """
    Validates that x lies on the model space (relative tolerance on the defining
    quadratic form) and returns it as an array.
    """
    x = _as_array(x)
    _check_width(space, x, "Point")
    if not np.all(np.isfinite(x)):
        raise PreconditionError("Point has non-finite coordinates")
    if space.kind is SpaceKind.EUCLIDEAN:
        return x
    scale = np.maximum(1.0, np.sum(x * x, axis=-1))
    if space.kind is SpaceKind.HYPERBOLOID:
        residual = np.abs(lorentz_inner(x, x) - 1.0 / space.curvature)
        if np.any(x[..., 0] <= 0):
            raise PreconditionError("Hyperboloid point is not on the upper sheet")
    else:
        residual = np.abs(np.sum(x * x, axis=-1) - 1.0 / space.curvature)
    if np.any(residual > tol * scale):
        raise PreconditionError(
            f"Point is off the {space.letter} model space (residual {float(np.max(residual)):.3e})"
        )
    return x


def _check_tangent(space: ModelSpace, base: np.ndarray, tangent: np.ndarray):
    if space.kind is SpaceKind.EUCLIDEAN:
        return
    if space.kind is SpaceKind.HYPERBOLOID:
        pairing = lorentz_inner(base, tangent)
    else:
        pairing = np.sum(base * tangent, axis=-1)
    scale = np.maximum(1.0, np.linalg.norm(base, axis=-1) * np.linalg.norm(tangent, axis=-1))
    if np.any(np.abs(pairing) > TANGENT_TOL * scale):
        raise PreconditionError(f"Tangent vector is not in the tangent space of {space.letter} at the base point")


def sinhc(r):
    """sinh(r)/r with the removable singularity at 0 filled by its Taylor series."""
    r = _as_array(r)
    small = np.abs(r) < SERIES_CUTOFF
    safe = np.where(small, 1.0, r)
    r2 = r * r
    return np.where(small, 1.0 + r2 / 6.0 + r2 * r2 / 120.0, np.sinh(safe) / safe)


def sinc(r):
    """sin(r)/r, series near 0 (numpy's sinc is the normalized one)."""
    r = _as_array(r)
    small = np.abs(r) < SERIES_CUTOFF
    safe = np.where(small, 1.0, r)
    r2 = r * r
    return np.where(small, 1.0 - r2 / 6.0 + r2 * r2 / 120.0, np.sin(safe) / safe)


def exp_map(space: ModelSpace, base, tangent) -> np.ndarray:
    """
    Exponential map of the model space at base applied to tangent.

    E: base + v
    H: cosh(sqrt(-K)|v|_L) base + sinh(sqrt(-K)|v|_L) v / (sqrt(-K)|v|_L)
    S: cos(sqrt(K)|v|) base + sin(sqrt(K)|v|) v / (sqrt(K)|v|)
    """
    base = check_point(space, base)
    tangent = _as_array(tangent)
    _check_width(space, tangent, "Tangent vector")
    if not np.any(tangent):
        return np.broadcast_to(base, np.broadcast_shapes(base.shape, tangent.shape)).copy()
    _check_tangent(space, base, tangent)

    if space.kind is SpaceKind.EUCLIDEAN:
        return base + tangent
    if space.kind is SpaceKind.HYPERBOLOID:
        norm = np.sqrt(np.maximum(lorentz_inner(tangent, tangent), 0.0))
        theta = np.sqrt(-space.curvature) * norm
        result = np.cosh(theta)[..., None] * base + sinhc(theta)[..., None] * tangent
    else:
        norm = np.linalg.norm(tangent, axis=-1)
        theta = np.sqrt(space.curvature) * norm
        result = np.cos(theta)[..., None] * base + sinc(theta)[..., None] * tangent
    return check_point(space, result, tol=TANGENT_TOL)


def geodesic_dist(space: ModelSpace, x, y):
    """Geodesic distance between two points of the same model space."""
    x = check_point(space, x)
    y = check_point(space, y)
    if space.kind is SpaceKind.EUCLIDEAN:
        return np.linalg.norm(x - y, axis=-1)
    diff = x - y
    if space.kind is SpaceKind.HYPERBOLOID:
        # chord length in the Minkowski norm; sqrt(-K) |x - y|_L = 2 sinh(d sqrt(-K) / 2)
        chord = np.sqrt(np.maximum(lorentz_inner(diff, diff), 0.0))
        return 2.0 * np.arcsinh(np.sqrt(-space.curvature) * chord / 2.0) / np.sqrt(-space.curvature)
    # atan2 of the chord against its antipodal complement stays exact at both ends
    chord = np.linalg.norm(diff, axis=-1)
    opposite = np.linalg.norm(x + y, axis=-1)
    return 2.0 * np.arctan2(chord, opposite) / np.sqrt(space.curvature)


def to_time_last(p) -> np.ndarray:
    """(t, x, y) -> (x, y, t): from the ambient convention to the stereographic formula's order."""
    p = _as_array(p)
    return np.concatenate([p[..., 1:], p[..., :1]], axis=-1)


def from_time_last(p) -> np.ndarray:
    """(x, y, t) -> (t, x, y)."""
    p = _as_array(p)
    return np.concatenate([p[..., -1:], p[..., :-1]], axis=-1)


def hyperboloid_to_poincare(p) -> np.ndarray:
    """(x, y, z) -> (x/(1+z), y/(1+z)), z the sheet coordinate."""
    p = _as_array(p)
    if p.shape[-1] != 3:
        raise DimensionError(f"Expected hyperboloid points with 3 coordinates, got {p.shape[-1]}")
    denominator = 1.0 + p[..., 2]
    if np.any(denominator <= 0):
        raise DomainError("Stereographic projection needs z > -1")
    return np.stack([p[..., 0] / denominator, p[..., 1] / denominator], axis=-1)


def poincare_to_uhp(p) -> np.ndarray:
    """Mobius map from the unit disk to the upper half-plane."""
    p = _as_array(p)
    if p.shape[-1] != 2:
        raise DimensionError(f"Expected disk points with 2 coordinates, got {p.shape[-1]}")
    x = p[..., 0]
    y = p[..., 1]
    if np.any(x * x + y * y >= 1.0):
        raise DomainError("Poincare disk points must have norm < 1")
    denominator = (x - 1.0) ** 2 + y ** 2
    return np.stack([-2.0 * y / denominator, (1.0 - x * x - y * y) / denominator], axis=-1)


def uhp_to_gminus1(p) -> np.ndarray:
    """(x, y) -> (-log y, x)."""
    p = _as_array(p)
    if p.shape[-1] != 2:
        raise DimensionError(f"Expected half-plane points with 2 coordinates, got {p.shape[-1]}")
    if np.any(p[..., 1] <= 0):
        raise DomainError("Upper half-plane points need y > 0")
    return np.stack([-np.log(p[..., 1]), p[..., 0]], axis=-1)


def gminus1_to_uhp(p) -> np.ndarray:
    """Inverse of uhp_to_gminus1: (x, y) -> (y, e^{-x})."""
    p = _as_array(p)
    return np.stack([p[..., 1], np.exp(-p[..., 0])], axis=-1)


def gminus1_distance(p, q):
    """Hyperbolic distance between points given in (R^2, g_-1) coordinates."""
    a = gminus1_to_uhp(p)
    b = gminus1_to_uhp(q)
    chord = np.linalg.norm(a - b, axis=-1)
    return 2.0 * np.arcsinh(chord / (2.0 * np.sqrt(a[..., 1] * b[..., 1])))


def exp0_gminus1(v) -> np.ndarray:
    """
    Exponential map of H^2 at the origin, written in (R^2, g_-1) coordinates:
    hyperboloid point of the tangent vector, stereographic projection, Mobius map to
    the half-plane, then (x, y) -> (-log y, x).
    """
    v = _as_array(v)
    if v.shape[-1] != 2:
        raise DimensionError(f"Expected tangent vectors with 2 coordinates, got {v.shape[-1]}")
    radius = np.linalg.norm(v, axis=-1)
    space = ModelSpace.default(SpaceKind.HYPERBOLOID)
    pole = origin(space)
    tangent = np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)
    on_sheet = np.cosh(radius)[..., None] * pole + sinhc(radius)[..., None] * tangent
    chart = uhp_to_gminus1(poincare_to_uhp(hyperboloid_to_poincare(to_time_last(on_sheet))))
    # normalizes the -0.0 produced at the origin
    return chart + 0.0
