from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlgraph.graph import (
    Clustering,
    Graph,
    Partition,
    contract,
    cut_value,
    max_block_weight,
    project_partition,
)

from oracles import bridge, naive_cut, path, random_graph, triangle


@st.composite
def graphs(draw, max_n: int = 12):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    ew = draw(st.lists(st.integers(1, 9), min_size=len(chosen), max_size=len(chosen)))
    nw = draw(st.lists(st.integers(1, 5), min_size=n, max_size=n))
    return Graph.from_edges(n, chosen, ew, nw)


def test_max_block_weight_uses_exact_decimal_eps():
    assert max_block_weight(100, 1, 0.03) == 103
    assert max_block_weight(6, 2, 0.0) == 3
    assert max_block_weight(7, 2, 0.0) == 4
    assert max_block_weight(3, 2, 1.0) == 4


def test_structure_invariants_triangle():
    g = triangle()
    assert (g.n, g.m) == (3, 3)
    assert g.offsets[-1] == 2 * g.m
    assert list(g.edges()) == [(0, 1, 1), (0, 2, 1), (1, 2, 1)]


def test_parallel_arcs_merge_and_loops_drop():
    g = Graph.from_edges(3, [(0, 1), (1, 0), (1, 1), (1, 2)], [2, 3, 5, 1])
    assert list(g.edges()) == [(0, 1, 5), (1, 2, 1)]


def test_asymmetric_arcs_rejected():
    with pytest.raises(ValueError, match="asymmetric"):
        Graph.from_arcs(2, [0], [1])


def test_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1)], [0])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1)], node_weights=[1, 0])


def test_contract_triangle_pair_cluster():
    cg, cmap = contract(triangle(), [0, 0, 1])
    assert cg.node_weight.tolist() == [2, 1]
    assert list(cg.edges()) == [(0, 1, 2)]
    assert cmap.tolist() == [0, 0, 1]


def test_contract_singletons_is_identity():
    g = bridge()
    cg, _ = contract(g, np.arange(g.n))
    assert cg == g


def test_contract_path_pairs():
    cg, _ = contract(path(4), [0, 0, 1, 1])
    assert (cg.n, list(cg.edges())) == (2, [(0, 1, 1)])


def test_project_triangle():
    cg, cmap = contract(triangle(), [0, 0, 1])
    cp = Partition.from_assignment(cg, [0, 1], 2, 0.5)
    fp = project_partition(cp, cmap)
    assert fp.assignment.tolist() == [0, 0, 1]
    assert cut_value(triangle(), fp) == cut_value(cg, cp) == 2


def test_project_single_block():
    g = bridge()
    cg, cmap = contract(g, [0, 0, 0, 1, 1, 1])
    fp = project_partition(Partition.from_assignment(cg, [0, 0], 1, 0.0), cmap)
    assert cut_value(g, fp) == 0


def test_project_random_contraction_preserves_cut():
    rng = random.Random(4)
    for _ in range(20):
        g = random_graph(rng, 10, 0.4, max_edge_weight=5)
        labels = [rng.randrange(4) for _ in range(g.n)]
        cg, cmap = contract(g, labels)
        cp = Partition.from_assignment(cg, [rng.randrange(2) for _ in range(cg.n)], 2, 1.0)
        fp = project_partition(cp, cmap)
        assert cut_value(g, fp) == cut_value(cg, cp) == naive_cut(g, fp.assignment)
        assert fp.block_weight.tolist() == cp.block_weight.tolist()


def test_cut_examples():
    assert cut_value(triangle(), [0, 0, 1]) == 2
    assert cut_value(bridge(), [0] * 6) == 0
    assert cut_value(bridge(), [0, 0, 0, 1, 1, 1]) == 1


def test_clustering_compacts_labels():
    c = Clustering.from_labels(path(4), [7, 7, 3, 9])
    assert c.assignment.tolist() == [1, 1, 0, 2]
    assert c.cluster_weight.tolist() == [1, 2, 1]
    assert c.num_clusters == 3


def test_subgraph():
    sub = bridge().subgraph([2, 3, 4])
    assert list(sub.edges()) == [(0, 1, 1), (1, 2, 1)]


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_contraction_weight_laws(g, data):
    labels = data.draw(st.lists(st.integers(0, 4), min_size=g.n, max_size=g.n))
    cg, cmap = contract(g, labels)
    assert cg.total_node_weight == g.total_node_weight
    intra = sum(w for u, v, w in g.edges() if labels[u] == labels[v])
    assert cg.total_edge_weight == g.total_edge_weight - intra
    blocks = data.draw(st.lists(st.integers(0, 2), min_size=cg.n, max_size=cg.n))
    cp = Partition.from_assignment(cg, blocks, 3, 10.0)
    assert cut_value(g, project_partition(cp, cmap)) == cut_value(cg, cp)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_csr_invariants(g):
    assert (np.diff(g.offsets) >= 0).all()
    assert g.offsets[-1] == 2 * g.m
    src = g.arc_sources()
    assert not (src == g.targets).any()
    arcs = {(int(a), int(b)): int(w) for a, b, w in zip(src, g.targets, g.edge_weight)}
    assert len(arcs) == len(g.targets)
    assert all(arcs[(b, a)] == w for (a, b), w in arcs.items())
