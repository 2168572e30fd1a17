import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np

from ..utils.errors import DimensionError, PreconditionError
from .model_spaces import ModelSpace, SpaceKind, check_point, exp_map, geodesic_dist, origin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Signature:
    """
    A product manifold given by its ordered list of factors. Two signatures name the
    same search-space node iff their canonical forms are equal.
    """
    factors: Tuple[ModelSpace, ...]
    # provenance flag only; equality and hashing look at the factors
    canonical: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ValueError("A signature needs at least one factor")

    @classmethod
    def from_kinds(cls, kinds: Iterable[SpaceKind]) -> "Signature":
        return cls(factors=tuple(ModelSpace.default(kind) for kind in kinds))

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Parses 'E,H,S' style strings; the result is canonicalized."""
        letters = [part for part in text.split(",") if part.strip()]
        if not letters:
            raise ValueError(f"Empty signature string '{text}'")
        return canonicalize(cls.from_kinds(SpaceKind.from_letter(letter) for letter in letters))

    @property
    def kinds(self) -> Tuple[SpaceKind, ...]:
        return tuple(factor.kind for factor in self.factors)

    @property
    def size(self) -> int:
        return len(self.factors)

    @property
    def counts(self) -> Tuple[int, int, int]:
        """(n_E, n_H, n_S)."""
        tally = Counter(self.kinds)
        return tally[SpaceKind.EUCLIDEAN], tally[SpaceKind.HYPERBOLOID], tally[SpaceKind.HYPERSPHERE]

    def __str__(self) -> str:
        return ",".join(factor.letter for factor in self.factors)


@dataclass(frozen=True, eq=False)
class ProductPoint:
    parts: Tuple[np.ndarray, ...]


def canonicalize(sig: Signature) -> Signature:
    """Sorts factors E < H < S (factor order does not matter for a product)."""
    ordered = sorted(sig.factors, key=lambda factor: (factor.kind.rank, factor.curvature, factor.dim))
    return Signature(factors=tuple(ordered), canonical=True)


def _conform(sig: Signature, p: ProductPoint) -> List[np.ndarray]:
    if len(p.parts) != sig.size:
        raise PreconditionError(f"Point has {len(p.parts)} parts, signature {sig} has {sig.size} factors")
    return [check_point(factor, part) for factor, part in zip(sig.factors, p.parts)]


def project(sig: Signature, tangent) -> ProductPoint:
    """
    Splits a flat tangent vector into consecutive per-factor blocks and sends each block
    through the factor's exponential map at its origin.
    """
    tangent = np.asarray(tangent, dtype=np.float64)
    expected = sum(factor.dim for factor in sig.factors)
    if tangent.ndim != 1 or tangent.shape[0] != expected:
        raise DimensionError(f"Signature {sig} needs a tangent vector of length {expected}, got shape {tangent.shape}")

    parts = []
    offset = 0
    for factor in sig.factors:
        block = tangent[offset:offset + factor.dim]
        offset += factor.dim
        if factor.kind is SpaceKind.HYPERBOLOID:
            # tangent space at the pole: time-like coordinate zero
            lifted = np.concatenate([[0.0], block])
        elif factor.kind is SpaceKind.HYPERSPHERE:
            lifted = np.concatenate([block, [0.0]])
        else:
            lifted = block
        parts.append(exp_map(factor, origin(factor), lifted))
    return ProductPoint(parts=tuple(parts))


def product_dist(sig: Signature, a: ProductPoint, b: ProductPoint) -> float:
    """sqrt(sum_i d_i(a_i, b_i)^2)."""
    parts_a = _conform(sig, a)
    parts_b = _conform(sig, b)
    squared = sum(float(geodesic_dist(factor, x, y)) ** 2 for factor, x, y in zip(sig.factors, parts_a, parts_b))
    return float(np.sqrt(squared))


def flatten(sig: Signature, p: ProductPoint, pad_euclidean: bool = True) -> np.ndarray:
    """
    Concatenates the parts. With pad_euclidean, every Euclidean part gets a trailing 0 so
    each 2-dimensional factor contributes 3 coordinates whatever its kind.
    """
    parts = _conform(sig, p)
    pieces = []
    for factor, part in zip(sig.factors, parts):
        pieces.append(part)
        if pad_euclidean and factor.kind is SpaceKind.EUCLIDEAN:
            pieces.append(np.zeros(1))
    return np.concatenate(pieces)
