"""
The graph search space: one node per canonical product-manifold signature, edges
between signatures that differ by a single factor, weighted by inverse
Gromov-Hausdorff distances.
"""
import json
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from ..geometry.gh_estimator import GhTable, preset_table
from ..geometry.model_spaces import SpaceKind
from ..geometry.product_manifold import Signature, canonicalize
from ..utils.errors import PreconditionError, ValidationError

logger = logging.getLogger(__name__)

KIND_ORDER = (SpaceKind.EUCLIDEAN, SpaceKind.HYPERBOLOID, SpaceKind.HYPERSPHERE)


class GraphVariant(str, Enum):
    GH_WEIGHTED = "gh"
    UNWEIGHTED_PRUNED = "unweighted"
    COMPLETE_UNWEIGHTED = "complete"


def slice_size(k: int) -> int:
    """Number of signatures with exactly k factors."""
    return (k + 1) * (k + 2) // 2


def recursion_node_count(h: int) -> float:
    """Tree-recursion count 3 + 5h/2 + h^2/2; equals slice_size(h + 1)."""
    return 3 + 2.5 * h + 0.5 * h * h


def enumerate_signatures(max_factors: int, fixed_size: Optional[int] = None) -> List[Signature]:
    """
    Every multiset over {E, H, S} with 1..max_factors elements (or exactly fixed_size),
    canonical, size-major and lexicographic within a size.
    """
    if fixed_size is None and max_factors < 1:
        raise PreconditionError(f"max_factors must be >= 1, got {max_factors}")
    if fixed_size is not None and fixed_size < 1:
        raise PreconditionError(f"fixed_size must be >= 1, got {fixed_size}")
    sizes = [fixed_size] if fixed_size is not None else range(1, max_factors + 1)

    nodes = []
    for k in sizes:
        level = [canonicalize(Signature.from_kinds(kinds)) for kinds in combinations_with_replacement(KIND_ORDER, k)]
        nodes.extend(sorted(level, key=str))
    return nodes


def _edge_kind(a: Tuple[int, int, int], b: Tuple[int, int, int]):
    """
    Classifies two count vectors (n_E, n_H, n_S): ('swap', kind_a, kind_b) for a single
    substitution, ('grow',) for a single insertion, None otherwise.
    """
    diff = [y - x for x, y in zip(a, b)]
    if sum(a) == sum(b):
        if sorted(diff) == [-1, 0, 1]:
            return "swap", KIND_ORDER[diff.index(-1)], KIND_ORDER[diff.index(1)]
        return None
    if abs(sum(a) - sum(b)) == 1 and (all(d >= 0 for d in diff) or all(d <= 0 for d in diff)):
        return ("grow",)
    return None


@dataclass(frozen=True, eq=False)
class GraphSpace:
    nodes: Tuple[Signature, ...]
    adjacency: np.ndarray
    variant: GraphVariant
    table: Optional[GhTable] = None
    rounded: bool = False

    def __post_init__(self):
        adjacency = np.array(self.adjacency, dtype=np.float64)
        adjacency.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def index(self) -> Dict[Signature, int]:
        return {sig: i for i, sig in enumerate(self.nodes)}

    def edges(self) -> List[Tuple[int, int, float]]:
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(rows, cols)]

    def is_connected(self) -> bool:
        """Breadth-first reachability from node 0."""
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in np.nonzero(self.adjacency[i])[0]:
                if int(j) not in seen:
                    seen.add(int(j))
                    queue.append(int(j))
        return len(seen) == self.size

    def with_variant(self, variant: GraphVariant) -> "GraphSpace":
        return build_graph(list(self.nodes), self.table, variant, self.rounded)

    def to_json(self) -> dict:
        return {
            "variant": self.variant.value,
            "nodes": [str(sig) for sig in self.nodes],
            "edges": [[i, j, w] for i, j, w in self.edges()],
        }

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=4, ensure_ascii=False)
            f.write("\n")
        logger.info(f"Graph with {self.size} nodes and {len(self.edges())} edges saved to {path}")


def build_graph(
    nodes: List[Signature],
    table: Optional[GhTable] = None,
    variant: GraphVariant = GraphVariant.GH_WEIGHTED,
    rounded: bool = False,
) -> GraphSpace:
    """
    Connects signatures differing by one substitution (weight 1/d_GH of the swapped
    kinds) or one insertion (weight 1/cross_dimension). The unweighted variant keeps
    these edges at weight 1; the complete variant connects every pair at weight 1.
    """
    variant = GraphVariant(variant)
    if not nodes:
        raise PreconditionError("A graph needs at least one node")
    if any(not sig.canonical for sig in nodes):
        raise PreconditionError("Graph nodes must be canonical signatures")
    if len(set(nodes)) != len(nodes):
        raise PreconditionError("Graph nodes contain duplicate signatures")
    if variant is GraphVariant.GH_WEIGHTED and table is None:
        table = preset_table()

    n = len(nodes)
    adjacency = np.zeros((n, n))
    if variant is GraphVariant.COMPLETE_UNWEIGHTED:
        adjacency[:] = 1.0
        np.fill_diagonal(adjacency, 0.0)
    else:
        counts = [sig.counts for sig in nodes]
        for i in range(n):
            for j in range(i + 1, n):
                kind = _edge_kind(counts[i], counts[j])
                if kind is None:
                    continue
                if variant is GraphVariant.UNWEIGHTED_PRUNED:
                    weight = 1.0
                elif kind[0] == "swap":
                    weight = table.weight(kind[1], kind[2], rounded)
                else:
                    weight = table.cross_weight()
                adjacency[i, j] = adjacency[j, i] = weight

    graph = GraphSpace(nodes=tuple(nodes), adjacency=adjacency, variant=variant, table=table, rounded=rounded)
    logger.info(f"Built {variant.value} graph: {n} nodes, {len(graph.edges())} edges")
    return graph


def laplacian(g: GraphSpace) -> np.ndarray:
    """L = D - A."""
    return np.diag(g.adjacency.sum(axis=1)) - g.adjacency


def distinct_edge_weights(g: GraphSpace) -> Set[float]:
    return {w for _, _, w in g.edges()}


def load_graph(path: str, table: Optional[GhTable] = None, rounded: bool = False) -> GraphSpace:
    """
    Reads a graph JSON document and checks it against the edge rules by rebuilding
    the graph from its node list; weights must match the rebuilt graph.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        variant = GraphVariant(data["variant"])
        nodes = [Signature.parse(text) for text in data["nodes"]]
        edges = data["edges"]
    except (FileNotFoundError, json.JSONDecodeError) as e:
        raise ValidationError(f"Could not read graph {path}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Malformed graph {path}: {e}") from e

    if [str(sig) for sig in nodes] != list(data["nodes"]):
        raise ValidationError(f"Graph {path} lists non-canonical signatures")
    n = len(nodes)
    adjacency = np.zeros((n, n))
    for edge in edges:
        try:
            i, j, w = int(edge[0]), int(edge[1]), float(edge[2])
        except (IndexError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed edge {edge} in {path}") from e
        if not 0 <= i < j < n or w <= 0:
            raise ValidationError(f"Edge {edge} in {path} needs 0 <= i < j < {n} and a positive weight")
        adjacency[i, j] = adjacency[j, i] = w

    try:
        expected = build_graph(nodes, table, variant, rounded)
    except PreconditionError as e:
        raise ValidationError(f"Graph {path} is invalid: {e}") from e
    if variant is GraphVariant.GH_WEIGHTED:
        # weights are checked against the table the file was built with only when one is given
        pattern_ok = np.array_equal(adjacency > 0, expected.adjacency > 0)
        weights_ok = table is None or np.allclose(adjacency, expected.adjacency, rtol=1e-12, atol=0.0)
    else:
        pattern_ok = weights_ok = np.array_equal(adjacency, expected.adjacency)
    if not (pattern_ok and weights_ok):
        raise ValidationError(f"Graph {path} does not follow the edge rules of a {variant.value} graph")

    logger.info(f"Loaded {variant.value} graph with {n} nodes from {path}")
    return GraphSpace(nodes=tuple(nodes), adjacency=adjacency, variant=variant, table=expected.table, rounded=rounded)
