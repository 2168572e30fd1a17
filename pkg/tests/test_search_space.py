import json
from collections import Counter
from itertools import product

import numpy as np
import pytest

from latent_geometry_search.geometry.model_spaces import SpaceKind
from latent_geometry_search.geometry.product_manifold import Signature
from latent_geometry_search.search.search_space import (
    GraphVariant, build_graph, distinct_edge_weights, enumerate_signatures, laplacian, load_graph,
    recursion_node_count, slice_size,
)
from latent_geometry_search.utils.errors import PreconditionError, ValidationError

E, H, S = SpaceKind.EUCLIDEAN, SpaceKind.HYPERBOLOID, SpaceKind.HYPERSPHERE


def multiset_oracle(max_factors):
    """Distinct sorted letter strings over every ordered word, the slow way."""
    seen = set()
    for k in range(1, max_factors + 1):
        for word in product("EHS", repeat=k):
            seen.add(",".join(sorted(word)))
    return seen


def sig(text):
    return Signature.parse(text)


@pytest.mark.parametrize("k, expected", [(1, 3), (2, 6), (3, 10), (13, 105)])
def test_slice_sizes(k, expected):
    assert slice_size(k) == expected
    assert len(enumerate_signatures(k, fixed_size=k)) == expected


def test_enumeration_matches_oracle():
    for max_factors in range(1, 8):
        nodes = enumerate_signatures(max_factors)
        assert {str(s) for s in nodes} == multiset_oracle(max_factors)
        assert len(nodes) == len(set(nodes))
    assert len(enumerate_signatures(7)) == 119
    assert len(enumerate_signatures(10)) == sum(slice_size(k) for k in range(1, 11))


def test_enumeration_order_is_size_major_and_lexicographic():
    names = [str(s) for s in enumerate_signatures(3)]
    assert names[:3] == ["E", "H", "S"]
    assert names[3:9] == ["E,E", "E,H", "E,S", "H,H", "H,S", "S,S"]
    assert all(s.canonical for s in enumerate_signatures(3))


def test_enumeration_preconditions():
    with pytest.raises(PreconditionError):
        enumerate_signatures(0)
    with pytest.raises(PreconditionError):
        enumerate_signatures(3, fixed_size=0)


def test_recursion_count_is_shifted_slice_size():
    assert recursion_node_count(1) == 6
    for h in range(0, 12):
        assert recursion_node_count(h) == slice_size(h + 1)


def test_worked_examples(gh_table):
    nodes = enumerate_signatures(3)
    g = build_graph(nodes, gh_table)
    at = g.index()
    a = g.adjacency
    assert a[at[sig("S,H")], at[sig("E,H")]] == pytest.approx(4.35, abs=0.01)
    assert a[at[sig("S,H")], at[sig("E,H")]] == gh_table.weight(E, S)
    assert a[at[sig("S,H")], at[sig("E,E")]] == 0
    assert a[at[sig("E,H")], at[sig("E,H,H")]] == 1
    assert a[at[sig("E")], at[sig("E,H,H")]] == 0
    assert a[at[sig("S")], at[sig("E,H")]] == 0


def test_adjacency_structure(graph_two):
    a = graph_two.adjacency
    np.testing.assert_array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert np.all(a >= 0)
    with pytest.raises(ValueError):
        a[0, 1] = 5.0


def test_same_substitution_edges_share_one_weight(gh_table):
    g = build_graph(enumerate_signatures(4), gh_table)
    by_swap = {}
    for i, j, w in g.edges():
        a, b = Counter(g.nodes[i].kinds), Counter(g.nodes[j].kinds)
        if g.nodes[i].size != g.nodes[j].size:
            assert w == 1.0
            continue
        key = frozenset(((a - b) + (b - a)).keys())
        by_swap.setdefault(key, set()).add(w)
    assert len(by_swap) == 3
    assert all(len(weights) == 1 for weights in by_swap.values())


def test_distinct_edge_weights(gh_table):
    weights = distinct_edge_weights(build_graph(enumerate_signatures(2), gh_table))
    assert weights == {1 / 0.23, 1 / 0.77, 1 / 0.84, 1.0}
    assert distinct_edge_weights(build_graph(enumerate_signatures(1), gh_table)) <= {1 / 0.23, 1 / 0.77, 1 / 0.84}
    assert len(distinct_edge_weights(build_graph(enumerate_signatures(5), gh_table))) == 4
    rounded = distinct_edge_weights(build_graph(enumerate_signatures(2), gh_table, rounded=True))
    assert rounded == {4.35, 1.30, 1.20, 1.0}


@pytest.mark.parametrize("variant", [GraphVariant.UNWEIGHTED_PRUNED, GraphVariant.COMPLETE_UNWEIGHTED])
def test_unweighted_variants(variant):
    g = build_graph(enumerate_signatures(3), variant=variant)
    assert distinct_edge_weights(g) == {1.0}
    if variant is GraphVariant.COMPLETE_UNWEIGHTED:
        assert len(g.edges()) == g.size * (g.size - 1) // 2


def test_pruned_variant_keeps_gh_edge_pattern(gh_table):
    weighted = build_graph(enumerate_signatures(4), gh_table)
    pruned = weighted.with_variant(GraphVariant.UNWEIGHTED_PRUNED)
    np.testing.assert_array_equal(weighted.adjacency > 0, pruned.adjacency > 0)


@pytest.mark.parametrize("variant", list(GraphVariant))
def test_every_variant_is_connected(variant):
    for max_factors in range(1, 6):
        assert build_graph(enumerate_signatures(max_factors), variant=variant).is_connected()
    assert build_graph(enumerate_signatures(13, fixed_size=13), variant=variant).is_connected()


def test_build_graph_rejects_bad_nodes():
    nodes = enumerate_signatures(2)
    with pytest.raises(PreconditionError):
        build_graph(nodes + [nodes[0]])
    with pytest.raises(PreconditionError):
        build_graph([])
    with pytest.raises(PreconditionError):
        build_graph([Signature.from_kinds([S, E])])


def test_two_node_laplacian(gh_table):
    g = build_graph(enumerate_signatures(1)[:2], gh_table)
    w = 1 / 0.77
    np.testing.assert_array_equal(laplacian(g), [[w, -w], [-w, w]])


def test_laplacian_properties(graph_two):
    lap = laplacian(graph_two)
    np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_array_equal(lap, lap.T)
    eigenvalues, eigenvectors = np.linalg.eigh(lap)
    assert eigenvalues[0] == pytest.approx(0.0, abs=1e-10)
    assert np.all(eigenvalues >= -1e-10)
    null = eigenvectors[:, 0]
    np.testing.assert_allclose(null, null[0] * np.ones_like(null), atol=1e-10)


def test_graph_file_round_trip(graph_two, gh_table, tmp_path):
    path = tmp_path / "graph.json"
    graph_two.save(str(path))
    data = json.loads(path.read_text())
    assert data["variant"] == "gh"
    assert data["nodes"][:3] == ["E", "H", "S"]
    assert all(i < j for i, j, _ in data["edges"])

    loaded = load_graph(str(path), gh_table)
    np.testing.assert_array_equal(loaded.adjacency, graph_two.adjacency)
    again = tmp_path / "again.json"
    loaded.save(str(again))
    assert again.read_bytes() == path.read_bytes()


def test_load_graph_rejects_rule_violations(graph_two, tmp_path):
    data = graph_two.to_json()
    data["edges"].append([0, graph_two.size - 1, 1.0])
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError):
        load_graph(str(path))


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(variant="dense"),
    lambda d: d.update(nodes=["H,E"] + d["nodes"][1:]),
    lambda d: d["edges"].append([1, 0, 1.0]),
    lambda d: d["edges"].append([0, 1, -1.0]),
    lambda d: d.pop("edges"),
])
def test_load_graph_rejects_malformed(graph_two, tmp_path, mutate):
    data = graph_two.to_json()
    mutate(data)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError):
        load_graph(str(path))


def test_load_graph_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        load_graph(str(tmp_path / "absent.json"))
