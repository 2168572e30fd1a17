"""
Exact Hausdorff distance between finite point clouds in a shared Euclidean space.

The directed distance uses the early-break scheme: outer points are visited in a
shuffled order while a running maximum cmax of nearest-neighbour distances is kept;
the inner scan for an outer point stops as soon as some inner point is closer than
cmax, because that outer point can no longer raise the maximum. Work is done in
numpy blocks: outer points in growing batches, inner points in growing chunks, and
an outer point leaves its batch as soon as its running minimum drops below cmax.
The value returned is identical to the plain double loop.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from ..utils.errors import DimensionError
from ..utils.rng import SplitMix64

logger = logging.getLogger(__name__)

FIRST_BATCH = 16
MAX_BATCH = 512
FIRST_CHUNK = 64
MAX_CHUNK = 4096
DIAMETER_BLOCK = 256
# keeps the inner order independent of the outer one for the same seed
_INNER_STREAM = 0x5DEECE66D


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise DimensionError(f"A point cloud is an N x D array with N, D >= 1, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("Point cloud has non-finite coordinates")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def translated(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=np.float64))


@lru_cache(maxsize=32)
def _shuffled_order(n: int, seed: int) -> np.ndarray:
    order = SplitMix64(seed).permutation(n)
    order.setflags(write=False)
    return order


def squared_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Pairwise squared Euclidean distances, accumulated coordinate by coordinate in
    index order (the same arithmetic as a scalar double loop).
    """
    diff = a[:, None, 0] - b[None, :, 0]
    total = diff * diff
    for k in range(1, a.shape[1]):
        diff = a[:, None, k] - b[None, :, k]
        total += diff * diff
    return total


def _directed_squared(a: np.ndarray, b: np.ndarray, seed: int, stop_above_sq: float = np.inf) -> float:
    """
    Squared directed Hausdorff distance from a to b. Returns early (with a value
    already above stop_above_sq) once the result is known to exceed that bound.
    """
    outer = a[_shuffled_order(a.shape[0], seed)]
    inner = b[_shuffled_order(b.shape[0], seed ^ _INNER_STREAM)]
    n_inner = inner.shape[0]

    cmax_sq = 0.0
    start = 0
    batch = FIRST_BATCH
    while start < outer.shape[0]:
        points = outer[start:start + batch]
        start += batch
        batch = min(2 * batch, MAX_BATCH)

        mins = np.full(points.shape[0], np.inf)
        active = np.arange(points.shape[0])
        position = 0
        chunk = FIRST_CHUNK
        while position < n_inner and active.size:
            block = inner[position:position + chunk]
            position += chunk
            chunk = min(2 * chunk, MAX_CHUNK)
            mins[active] = np.minimum(mins[active], squared_distance_matrix(points[active], block).min(axis=1))
            # early break: these points cannot raise the running maximum
            active = active[mins[active] >= cmax_sq]

        if active.size:
            cmax_sq = max(cmax_sq, float(mins[active].max()))
            if cmax_sq > stop_above_sq:
                return cmax_sq
    return cmax_sq


def _check_pair(a: PointCloud, b: PointCloud):
    if a.dim != b.dim:
        raise DimensionError(f"Point clouds live in different dimensions ({a.dim} vs {b.dim})")


def directed_hausdorff(a: PointCloud, b: PointCloud, shuffle_seed: Optional[int] = None) -> float:
    """max over a of the distance to the nearest point of b."""
    _check_pair(a, b)
    return float(np.sqrt(_directed_squared(a.points, b.points, shuffle_seed or 0)))


def hausdorff_dist(a: PointCloud, b: PointCloud, shuffle_seed: Optional[int] = None) -> float:
    """Symmetric Hausdorff distance: the larger of the two directed distances."""
    _check_pair(a, b)
    seed = shuffle_seed or 0
    forward = _directed_squared(a.points, b.points, seed)
    backward = _directed_squared(b.points, a.points, seed)
    return float(np.sqrt(max(forward, backward)))


def bounded_hausdorff(a: PointCloud, b: PointCloud, bound: float, shuffle_seed: Optional[int] = None) -> float:
    """
    Hausdorff distance when it is <= bound; otherwise some value > bound.
    Used by minimizing sweeps, where losing candidates need not be finished.
    """
    _check_pair(a, b)
    seed = shuffle_seed or 0
    bound_sq = bound * bound if np.isfinite(bound) else np.inf
    forward = _directed_squared(a.points, b.points, seed, bound_sq)
    if forward > bound_sq:
        return float(np.sqrt(forward))
    backward = _directed_squared(b.points, a.points, seed, bound_sq)
    return float(np.sqrt(max(forward, backward)))


def diameter(a: PointCloud) -> float:
    """Largest pairwise distance, computed block by block."""
    points = a.points
    best = 0.0
    for start in range(0, points.shape[0], DIAMETER_BLOCK):
        block = points[start:start + DIAMETER_BLOCK]
        best = max(best, float(cdist(block, points[start:]).max()))
    return best
