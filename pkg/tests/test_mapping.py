from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlgraph.graph import Graph
from mlgraph.mapping import HierarchySpec, ProcessMapping, comm_cost, top_down_map
from mlgraph.multilevel import PartitionConfig

from oracles import complete, random_graph


def naive_distance(spec: HierarchySpec, p: int, q: int) -> int:
    """Highest differing digit, from explicit digit lists."""
    dp, dq = spec.digits(p), spec.digits(q)
    diff = [i + 1 for i in range(len(dp)) if dp[i] != dq[i]]
    return max(diff, default=0)


def test_hierarchy_parse_and_validation():
    assert HierarchySpec.parse("4:2:3").factors == (4, 2, 3)
    assert HierarchySpec.parse("4:2:3").num_pes == 24
    for bad in ("", "2:x", "0:2"):
        with pytest.raises(ValueError):
            HierarchySpec.parse(bad)


def test_single_level_bijection():
    g = random_graph(random.Random(0), 4, 0.5)
    mp = top_down_map(g, HierarchySpec((4,)))
    assert mp.is_bijection(4)


def test_trivial_hierarchy():
    mp = top_down_map(Graph.from_edges(1, []), HierarchySpec((1, 1, 1)))
    assert mp.sigma.tolist() == [0]


def test_size_mismatch_rejected():
    with pytest.raises(ValueError):
        top_down_map(complete(5), HierarchySpec((2, 2)))


def test_two_cliques_share_processors():
    g = Graph.from_edges(4, [(0, 2), (1, 3), (0, 1)], [10, 10, 1])
    spec = HierarchySpec((2, 2))
    sigma = top_down_map(g, spec).sigma
    # tasks of one clique sit on the same processor (equal second digit)
    assert sigma[0] // 2 == sigma[2] // 2
    assert sigma[1] // 2 == sigma[3] // 2
    assert sigma[0] // 2 != sigma[1] // 2
    assert comm_cost(g, sigma, spec) == 10 + 10 + 2


def test_cost_single_processor():
    g = random_graph(random.Random(3), 6, 0.5, max_edge_weight=4)
    assert comm_cost(g, np.arange(6), HierarchySpec((6,))) == g.total_edge_weight


def test_cost_k4_every_bijection_is_ten():
    g = complete(4)
    spec = HierarchySpec((2, 2))
    costs = {comm_cost(g, list(perm), spec) for perm in itertools.permutations(range(4))}
    assert costs == {10}
    assert comm_cost(g, top_down_map(g, spec), spec) == 10


def test_cost_edgeless():
    assert comm_cost(Graph.from_edges(4, []), [3, 1, 0, 2], HierarchySpec((2, 2))) == 0


def test_cost_accepts_mapping_object():
    g = complete(4)
    assert comm_cost(g, ProcessMapping(np.arange(4)), HierarchySpec((4,))) == 6


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_distance_laws(factors, data):
    spec = HierarchySpec(tuple(factors))
    p = data.draw(st.integers(0, spec.num_pes - 1))
    q = data.draw(st.integers(0, spec.num_pes - 1))
    d = spec.distance(p, q)
    assert d == spec.distance(q, p) == naive_distance(spec, p, q)
    assert spec.distance(p, p) == 0
    assert 0 <= d <= len(factors)
    assert (d == 0) == (p == q)


def test_distance_vector_matches_scalar():
    spec = HierarchySpec((3, 2, 2))
    g = complete(12)
    rng = random.Random(5)
    sigma = rng.sample(range(12), 12)
    expected = sum(spec.distance(sigma[u], sigma[v]) for u, v, _ in g.edges())
    assert comm_cost(g, sigma, spec) == expected


@pytest.mark.parametrize("factors", [(2, 2), (2, 2, 2), (3, 2), (4, 1, 2), (1, 3)])
def test_always_bijection(factors):
    spec = HierarchySpec(factors)
    rng = random.Random(sum(factors))
    for trial in range(10):
        g = random_graph(rng, spec.num_pes, 0.4, max_edge_weight=9, max_node_weight=3)
        mp = top_down_map(g, spec, PartitionConfig(seed=trial))
        assert mp.is_bijection(spec.num_pes)


def test_leaf_order_does_not_change_cost():
    # permuting PEs inside each leaf group leaves every distance unchanged
    spec = HierarchySpec((2, 2, 2))
    g = random_graph(random.Random(9), 8, 0.5, max_edge_weight=5)
    sigma = top_down_map(g, spec).sigma
    swapped = sigma ^ 1
    assert comm_cost(g, sigma, spec) == comm_cost(g, swapped, spec)


def test_node_weights_ignored_for_group_sizes():
    g = Graph.from_edges(4, [(0, 1), (2, 3)], node_weights=[7, 1, 1, 1])
    assert top_down_map(g, HierarchySpec((2, 2))).is_bijection(4)
