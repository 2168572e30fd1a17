"""
Upper-bound estimates of Gromov-Hausdorff distances between the unit balls of
E^2, H^2 and S^2.

The hyperbolic ball is placed in E^6 once, through the Blanuša map. The Euclidean
and spherical balls are then embedded into E^6 along every choice of coordinate
axes (and, for the sphere, with both signs), translated along one axis at a time
over an offset grid, and the smallest Hausdorff distance found is the estimate.
The spherical cap is first shifted along its pole axis so that its heights
[cos 1, 1] straddle zero, so sphere offsets are measured from the cap middle.
The Euclidean-spherical distance has closed-form bounds and needs no sweep.
"""
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.config import GhSettings
from ..utils.errors import MissingConstantsError, PreconditionError, ValidationError
from ..utils.parallel import parallel_map
from .blanusa import BlanusaEmbedding, blanusa_map
from .hausdorff import PointCloud, bounded_hausdorff
from .model_spaces import SpaceKind, exp0_gminus1

logger = logging.getLogger(__name__)

AMBIENT_DIM = 6
HYPERBOLIC_MIN_RADIUS = 1e-8
HYPERBOLIC_MAX_RADIUS = 0.97
# pole coordinate of the middle of the unit cap, (1 + cos 1) / 2
CAP_CENTER = (1.0 + math.cos(1.0)) / 2.0

E, H, S = SpaceKind.EUCLIDEAN, SpaceKind.HYPERBOLOID, SpaceKind.HYPERSPHERE

Pair = FrozenSet[SpaceKind]
PAIR_KEYS: Dict[Pair, str] = {
    frozenset({E, S}): "E-S",
    frozenset({E, H}): "E-H",
    frozenset({S, H}): "S-H",
}
KEY_PAIRS: Dict[str, Pair] = {key: pair for pair, key in PAIR_KEYS.items()}

PRESET_DISTANCES = {"E-S": 0.23, "E-H": 0.77, "S-H": 0.84}
# published weights, rounded to two decimals (S-H is 1.20 there, not 1/0.84)
PRESET_ROUNDED_WEIGHTS = {"E-S": 4.35, "E-H": 1.30, "S-H": 1.20}


class Provenance(str, Enum):
    ANALYTIC = "analytic"
    ESTIMATED = "estimated"
    PAPER_PRESET = "paper_preset"


class GhTableMode(str, Enum):
    PAPER_PRESET = "paper"
    RECOMPUTE = "recompute"


def sample_ball(kind: SpaceKind, res_r: int, res_t: int, emb: Optional[BlanusaEmbedding] = None) -> PointCloud:
    """
    Polar grid over the unit ball of a model space: res_r radii times res_t angles.
    Euclidean points live in R^2, spherical ones in R^3 around the pole (0, 0, 1),
    hyperbolic ones in R^6 (through the Blanuša map, on the radius range [1e-8, 0.97]).
    """
    if res_r < 2 or res_t < 2:
        raise PreconditionError(f"Resolutions must be >= 2, got res_r={res_r}, res_t={res_t}")
    angles = np.linspace(0.0, 2.0 * np.pi, res_t, endpoint=False)

    if kind is SpaceKind.EUCLIDEAN:
        r, t = np.meshgrid(np.linspace(0.0, 1.0, res_r), angles, indexing="ij")
        points = np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)
    elif kind is SpaceKind.HYPERSPHERE:
        beta, alpha = np.meshgrid(np.linspace(0.0, 1.0, res_r), angles, indexing="ij")
        points = np.stack([np.sin(beta) * np.cos(alpha), np.sin(beta) * np.sin(alpha), np.cos(beta)], axis=-1)
    else:
        if emb is None:
            raise MissingConstantsError("Sampling the hyperbolic ball needs the embedding constants")
        r, t = np.meshgrid(np.linspace(HYPERBOLIC_MIN_RADIUS, HYPERBOLIC_MAX_RADIUS, res_r), angles, indexing="ij")
        tangent = np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)
        points = blanusa_map(emb, exp0_gminus1(tangent))
    return PointCloud(points.reshape(-1, points.shape[-1]))


def euclidean_embeddings() -> List[Tuple[int, int]]:
    """Every unordered pair of E^6 axes that can carry the plane (15 of them)."""
    return list(combinations(range(AMBIENT_DIM), 2))


def sphere_embeddings() -> List[Tuple[Tuple[int, int, int], float]]:
    """Every axis triple for the sphere, each with the cloud and its negation (2 x 20)."""
    return [(axes, sign) for axes in combinations(range(AMBIENT_DIM), 3) for sign in (1.0, -1.0)]


def embed_into_axes(points: np.ndarray, axes: Sequence[int], sign: float = 1.0) -> np.ndarray:
    embedded = np.zeros((points.shape[0], AMBIENT_DIM))
    embedded[:, list(axes)] = sign * points
    return embedded


def centered_cap(cap: np.ndarray) -> np.ndarray:
    """Spherical cap samples with the pole coordinate shifted by -(1 + cos 1) / 2."""
    centered = np.array(cap, dtype=np.float64, copy=True)
    centered[:, 2] -= CAP_CENTER
    return centered


def offset_grid(steps: int, offset_range: float = 0.5) -> np.ndarray:
    """
    steps + 1 offsets spread uniformly over [-offset_range, offset_range]. Doubling
    steps reproduces every previous offset bit for bit.
    """
    if steps < 1:
        raise PreconditionError(f"offset steps must be >= 1, got {steps}")
    return offset_range * (2.0 * np.arange(steps + 1) / steps - 1.0)


@dataclass
class SweepBest:
    value: float
    label: str
    axis: int
    offset: float


def _sweep_family(task) -> SweepBest:
    """
    Minimum Hausdorff distance over one embedding family and every single-axis
    offset. Runs in a worker process.
    """
    label, embedded, target, offsets, shuffle_seed = task
    target_cloud = PointCloud(target)
    best = SweepBest(value=math.inf, label=label, axis=-1, offset=0.0)
    for axis in range(AMBIENT_DIM):
        for offset in offsets:
            moved = embedded.copy()
            moved[:, axis] += offset
            value = bounded_hausdorff(PointCloud(moved), target_cloud, best.value, shuffle_seed)
            if value < best.value:
                best = SweepBest(value=value, label=label, axis=axis, offset=float(offset))
    logger.debug(f"Family {label}: best {best.value:.6f} at axis {best.axis}, offset {best.offset:+.4f}")
    return best


def _sweep(families: List[Tuple[str, np.ndarray]], target: PointCloud, gh: GhSettings, workers: Optional[int]) -> float:
    offsets = offset_grid(gh.offset_steps, gh.offset_range)
    tasks = [(label, embedded, target.points, offsets, gh.shuffle_seed) for label, embedded in families]
    results = parallel_map(_sweep_family, tasks, workers)
    # ties resolve to the first family in enumeration order
    winner = min(results, key=lambda best: best.value)
    logger.info(
        f"Sweep over {len(families)} families x {AMBIENT_DIM} axes x {len(offsets)} offsets: "
        f"{winner.value:.6f} ({winner.label}, axis {winner.axis}, offset {winner.offset:+.4f})"
    )
    return winner.value


def estimate_gh_eh(emb: BlanusaEmbedding, gh: GhSettings = GhSettings(), workers: Optional[int] = None) -> float:
    """Upper bound on d_GH(B_E2, B_H2)."""
    if emb is None:
        raise MissingConstantsError("Estimating E-H needs the embedding constants")
    target = sample_ball(SpaceKind.HYPERBOLOID, gh.res_r, gh.res_t, emb)
    plane = sample_ball(SpaceKind.EUCLIDEAN, gh.res_r, gh.res_t).points
    families = [(f"E->axes{axes}", embed_into_axes(plane, axes)) for axes in euclidean_embeddings()]
    return _sweep(families, target, gh, workers)


def estimate_gh_sh(emb: BlanusaEmbedding, gh: GhSettings = GhSettings(), workers: Optional[int] = None) -> float:
    """Upper bound on d_GH(B_S2, B_H2)."""
    if emb is None:
        raise MissingConstantsError("Estimating S-H needs the embedding constants")
    target = sample_ball(SpaceKind.HYPERBOLOID, gh.res_r, gh.res_t, emb)
    cap = centered_cap(sample_ball(SpaceKind.HYPERSPHERE, gh.sphere_res_r, gh.sphere_res_t).points)
    families = [
        (f"{'+' if sign > 0 else '-'}S->axes{axes}", embed_into_axes(cap, axes, sign))
        for axes, sign in sphere_embeddings()
    ]
    return _sweep(families, target, gh, workers)


def es_embedding_hausdorff(x: float) -> float:
    """
    Hausdorff distance between the unit spherical cap around the north pole of S^1
    and the unit segment placed at height 1 - x, for x in [0, 1 - cos 1].
    """
    low, high = 1.0 - math.sin(1.0), 1.0 - math.cos(1.0)
    if not 0.0 <= x <= high:
        raise PreconditionError(f"x must lie in [0, 1 - cos 1], got {x}")
    return max(x, high - x, math.hypot(low, high - x))


def analytic_es_bounds() -> Tuple[float, float]:
    """(lower, upper) for d_GH(B_E2, B_S2): the cap-to-plane gap and the best offset plane."""
    lower = (1.0 - math.cos(1.0)) / 2.0
    upper = ((1.0 - math.sin(1.0)) ** 2 + (1.0 - math.cos(1.0)) ** 2) / (2.0 - 2.0 * math.cos(1.0))
    return lower, upper


@dataclass(frozen=True)
class GhTable:
    entries: Dict[Pair, float]
    provenance: Dict[Pair, Provenance]
    cross_dimension: float = 1.0

    def __post_init__(self):
        if set(self.entries) != set(PAIR_KEYS) or set(self.provenance) != set(PAIR_KEYS):
            raise ValidationError(f"A GH table needs exactly the pairs {sorted(PAIR_KEYS.values())}")
        for pair, value in self.entries.items():
            if not 0.0 < value <= 1.0:
                raise ValidationError(f"GH distance for {PAIR_KEYS[pair]} must lie in (0, 1], got {value}")
        if self.cross_dimension != 1.0:
            raise ValidationError(f"cross_dimension must be 1, got {self.cross_dimension}")

    def distance(self, a: SpaceKind, b: SpaceKind) -> float:
        if a is b:
            return 0.0
        return self.entries[frozenset({a, b})]

    def weight(self, a: SpaceKind, b: SpaceKind, rounded: bool = False) -> float:
        """Edge weight of a one-factor substitution a <-> b."""
        if a is b:
            raise PreconditionError(f"No substitution weight between identical kinds {a.value}")
        pair = frozenset({a, b})
        if rounded:
            if self.provenance[pair] is Provenance.PAPER_PRESET:
                return PRESET_ROUNDED_WEIGHTS[PAIR_KEYS[pair]]
            return round(1.0 / self.entries[pair], 2)
        return 1.0 / self.entries[pair]

    def cross_weight(self) -> float:
        return 1.0 / self.cross_dimension

    def to_json(self) -> dict:
        ordered = list(PRESET_DISTANCES)
        return {
            "pairs": {key: self.entries[KEY_PAIRS[key]] for key in ordered},
            "cross_dimension": self.cross_dimension,
            "provenance": {key: self.provenance[KEY_PAIRS[key]].value for key in ordered},
        }

    @staticmethod
    def from_json(data: dict) -> "GhTable":
        try:
            pairs = data["pairs"]
            provenance = data["provenance"]
            if isinstance(provenance, str):
                provenance = {key: provenance for key in pairs}
            return GhTable(
                entries={KEY_PAIRS[key]: float(value) for key, value in pairs.items()},
                provenance={KEY_PAIRS[key]: Provenance(value) for key, value in provenance.items()},
                cross_dimension=float(data.get("cross_dimension", 1.0)),
            )
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Malformed GH table: {e}") from e

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=4, ensure_ascii=False)
            f.write("\n")
        logger.info(f"GH table saved to {path}")

    @staticmethod
    def load(path: str) -> "GhTable":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError) as e:
            raise ValidationError(f"Could not read GH table {path}: {e}") from e
        return GhTable.from_json(data)


def preset_table() -> GhTable:
    return GhTable(
        entries={KEY_PAIRS[key]: value for key, value in PRESET_DISTANCES.items()},
        provenance={pair: Provenance.PAPER_PRESET for pair in PAIR_KEYS},
    )


def build_gh_table(
    mode: GhTableMode = GhTableMode.PAPER_PRESET,
    emb: Optional[BlanusaEmbedding] = None,
    gh: GhSettings = GhSettings(),
    workers: Optional[int] = None,
) -> GhTable:
    mode = GhTableMode(mode)
    if mode is GhTableMode.PAPER_PRESET:
        return preset_table()
    if emb is None:
        raise MissingConstantsError("Recomputing the GH table needs the embedding constants")

    lower, _ = analytic_es_bounds()
    table = GhTable(
        entries={
            frozenset({E, S}): lower,
            frozenset({E, H}): estimate_gh_eh(emb, gh, workers),
            frozenset({S, H}): estimate_gh_sh(emb, gh, workers),
        },
        provenance={
            frozenset({E, S}): Provenance.ANALYTIC,
            frozenset({E, H}): Provenance.ESTIMATED,
            frozenset({S, H}): Provenance.ESTIMATED,
        },
    )
    logger.info(f"Recomputed GH table: {table.to_json()['pairs']}")
    return table
