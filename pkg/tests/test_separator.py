from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlgraph.errors import InfeasibleError
from mlgraph.graph import Graph, Partition
from mlgraph.multilevel import PartitionConfig
from mlgraph.separator import (
    SEP,
    V1,
    V2,
    FlowNetwork,
    Separator,
    build_flow_problem,
    derive_separator,
    flow_refine,
    fm_separator_refine,
    multilevel_separator,
    node_capacitated_maxflow,
)

from oracles import (
    bridge,
    brute_min_separator,
    brute_region_cut,
    complete,
    grid,
    path,
    random_graph,
    separator_ok,
    star,
)
from test_graph import graphs


def sep_of(g, labels):
    return Separator.from_labels(g, labels)


# ------------------------------------------------------------------ type


def test_separator_checks():
    g = path(3)
    assert sep_of(g, [0, 2, 1]).is_valid(g)
    assert not sep_of(g, [0, 1, 1]).is_valid(g)
    assert sep_of(g, [0, 2, 1]).weights.tolist() == [1, 1, 1]
    assert sep_of(g, [0, 0, 2]).is_balanced(g, 0.0)  # L_max = ceil(3/2) = 2
    assert not sep_of(path(4), [0, 0, 0, 2]).is_balanced(path(4), 0.0)
    with pytest.raises(ValueError):
        sep_of(g, [0, 3, 1])


# ------------------------------------------------------------------ derive


def test_derive_p4_tie_goes_to_first_side():
    g = path(4)
    sep = derive_separator(g, Partition.from_assignment(g, [0, 0, 1, 1], 2, 0.0))
    assert sep.assignment.tolist() == [V1, SEP, V2, V2]


def test_derive_edgeless_has_empty_separator():
    g = Graph.from_edges(4, [])
    sep = derive_separator(g, Partition.from_assignment(g, [0, 0, 1, 1], 2, 0.0))
    assert sep.size == 0


def test_derive_bridge_picks_one_endpoint():
    g = bridge()
    sep = derive_separator(g, Partition.from_assignment(g, [0, 0, 0, 1, 1, 1], 2, 0.0))
    assert sep.size == 1 and sep.nodes().tolist() == [2]
    assert sep.is_valid(g)


def test_derive_picks_lighter_side():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], node_weights=[1, 5, 2, 1])
    sep = derive_separator(g, Partition.from_assignment(g, [0, 0, 1, 1], 2, 5.0))
    assert sep.nodes().tolist() == [2]


# ------------------------------------------------------------------ FM


def test_fm_p3_zero_gain_is_rolled_back():
    g = path(3)
    out = fm_separator_refine(g, sep_of(g, [0, 2, 1]), 0.0)
    assert out.size == 1
    assert out.assignment.tolist() == [0, 2, 1]


def test_fm_star_keeps_center():
    g = star(4)
    out = fm_separator_refine(g, sep_of(g, [2, 0, 0, 1, 1]), 0.0)
    assert out.nodes().tolist() == [0]
    assert out.size == brute_min_separator(g, 0.0) == 1


def test_fm_empty_separator_unchanged():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    sep = sep_of(g, [0, 0, 1, 1])
    assert fm_separator_refine(g, sep, 0.0).assignment.tolist() == [0, 0, 1, 1]


def test_fm_thins_a_fat_separator():
    g = path(7)
    sep = sep_of(g, [0, 0, 2, 2, 2, 1, 1])
    out = fm_separator_refine(g, sep, 0.2, seed=1)
    assert out.size == 1 and out.is_valid(g) and out.is_balanced(g, 0.2)


def test_fm_moves_respect_balance_and_track_weights():
    rng = random.Random(12)
    g = random_graph(rng, 30, 0.15, max_node_weight=3)
    sep = derive_separator(g, Partition.from_assignment(g, [v % 2 for v in range(30)], 2, 0.5))
    lmax = Partition(2, 0.5, np.zeros(1), np.array([g.total_node_weight])).max_block_weight
    states = []

    def hook(v, side, pulled, w3):
        states.append(list(w3))
        assert w3[side] <= lmax

    out = fm_separator_refine(g, sep, 0.5, seed=3, on_move=hook)
    assert out.size <= sep.size
    assert all(sum(w) == g.total_node_weight for w in states)


# ------------------------------------------------------------------ flow problem


def test_flow_problem_p5_large_eps_covers_path():
    g = path(5)
    fn = build_flow_problem(g, sep_of(g, [0, 0, 2, 1, 1]), 10.0)
    assert fn.region.tolist() == [0, 1, 2, 3, 4]
    assert fn.left_border == {0} and fn.right_border == {4}
    assert fn.inf == g.total_node_weight + 1


def test_flow_problem_p5_zero_eps_budget():
    g = path(5)
    fn = build_flow_problem(g, sep_of(g, [0, 0, 2, 1, 1]), 0.0)
    assert set(fn.region.tolist()) <= {1, 2, 3}


def test_flow_problem_empty_side():
    g = path(4)
    fn = build_flow_problem(g, sep_of(g, [2, 1, 1, 1]), 1.0)
    assert fn.left_border == set()
    assert node_capacitated_maxflow(fn) == (0, set())


def test_flow_problem_empty_separator_signals():
    g = Graph.from_edges(2, [])
    with pytest.raises(ValueError):
        build_flow_problem(g, sep_of(g, [0, 1]), 0.0)


# ------------------------------------------------------------------ max-flow


def test_maxflow_p5_single_middle_node():
    g = path(5)
    fn = build_flow_problem(g, sep_of(g, [0, 0, 2, 1, 1]), 10.0)
    for side in ("source", "sink"):
        value, cut = node_capacitated_maxflow(fn, side)
        assert value == 1 and len(cut) == 1 and cut <= {0, 1, 2, 3, 4}
    assert node_capacitated_maxflow(fn, "source")[1] == {0}
    assert node_capacitated_maxflow(fn, "sink")[1] == {4}


def test_maxflow_two_disjoint_paths():
    # region nodes 0-1-2 and 3-4-5; s attaches to 0 and 3, t to 2 and 5
    fn = FlowNetwork(
        region=np.arange(6), capacity=np.ones(6, dtype=np.int64),
        arcs=[(0, 1), (1, 0), (1, 2), (2, 1), (3, 4), (4, 3), (4, 5), (5, 4)],
        source_arcs=[0, 3], sink_arcs=[2, 5], inf=7,
    )
    value, cut = node_capacitated_maxflow(fn)
    assert value == 2
    assert len(cut & {0, 1, 2}) == 1 and len(cut & {3, 4, 5}) == 1


def test_maxflow_respects_node_weights():
    # a heavy bottleneck node is bypassed by cutting the two light ones
    g = Graph.from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)], node_weights=[1, 1, 1, 5, 1])
    fn = build_flow_problem(g, sep_of(g, [0, 2, 2, 1, 1]), 10.0)
    value, cut = node_capacitated_maxflow(fn)
    assert value == brute_region_cut(g, fn.region, fn.left_border, fn.right_border)


def test_maxflow_rejects_unknown_side():
    g = path(3)
    with pytest.raises(ValueError):
        node_capacitated_maxflow(build_flow_problem(g, sep_of(g, [0, 2, 1]), 1.0), "middle")


# ------------------------------------------------------------------ flow refine


def test_flow_refine_bridge_shrinks_to_one_endpoint():
    g = bridge()
    sep = sep_of(g, [0, 0, 2, 2, 1, 1])
    out = flow_refine(g, sep, 0.5)
    assert out.size == 1 and out.is_valid(g) and out.is_balanced(g, 0.5)


def test_flow_refine_p5_moves_separator_to_center():
    g = path(5)
    sep = sep_of(g, [0, 2, 1, 1, 1])
    assert sep.is_balanced(g, 0.1)
    out = flow_refine(g, sep, 0.1)
    assert out.nodes().tolist() == [2]
    assert max(out.weights[:2]) < max(sep.weights[:2])


def test_flow_refine_minimum_unchanged():
    g = path(5)
    sep = sep_of(g, [0, 0, 2, 1, 1])
    assert flow_refine(g, sep, 0.1).assignment.tolist() == sep.assignment.tolist()


# ------------------------------------------------------------------ driver


@pytest.mark.parametrize("seed", range(3))
def test_multilevel_p5(seed):
    g = path(5)
    sep = multilevel_separator(g, 0.3, PartitionConfig(seed=seed))
    assert sep.size == brute_min_separator(g, 0.3) == 1
    assert separator_ok(g, sep.assignment, 0.3)


def test_multilevel_grid_matches_enumeration():
    g = grid(4, 4)
    opt = brute_min_separator(g, 0.3)
    sep = multilevel_separator(g, 0.3)
    assert separator_ok(g, sep.assignment, 0.3)
    assert sep.size == opt


def test_multilevel_k4_matches_enumeration():
    g = complete(4)
    sep = multilevel_separator(g, 1.0)
    assert separator_ok(g, sep.assignment, 1.0)
    assert sep.size == brute_min_separator(g, 1.0)


def test_multilevel_k4_tight_balance_needs_two_nodes():
    # with eps=0.3 a side may hold at most 2 nodes, so two nodes must be separated
    g = complete(4)
    assert brute_min_separator(g, 0.3) == 2
    sep = multilevel_separator(g, 0.3)
    assert sep.size == 2 and separator_ok(g, sep.assignment, 0.3)


def test_multilevel_infeasible():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], node_weights=[9, 1, 1])
    with pytest.raises(InfeasibleError):
        multilevel_separator(g, 0.0)


def test_multilevel_larger_graph_valid():
    rng = random.Random(2)
    g = random_graph(rng, 300, 0.015, connected=True)
    sep = multilevel_separator(g, 0.2, PartitionConfig(seed=5))
    assert separator_ok(g, sep.assignment, 0.2)
    assert sep.weights.sum() == g.total_node_weight


def test_multilevel_disconnected_graph():
    g = Graph.from_edges(8, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7)])
    sep = multilevel_separator(g, 0.0)
    assert sep.size == 0 and separator_ok(g, sep.assignment, 0.0)


# ------------------------------------------------------------------ properties


def _random_balanced_separator(g, eps, rng):
    nodes = list(range(g.n))
    rng.shuffle(nodes)
    labels = [0] * g.n
    for i, v in enumerate(nodes):
        labels[v] = i % 2
    p = Partition.from_assignment(g, labels, 2, eps)
    if not p.is_balanced():
        return None
    return derive_separator(g, p)


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=12), st.sampled_from([0.0, 0.2, 0.6]), st.integers(0, 10_000))
def test_refiners_non_worsening_valid_balanced(g, eps, seed):
    sep = _random_balanced_separator(g, eps, random.Random(seed))
    if sep is None or not sep.is_balanced(g, eps):
        return
    a = fm_separator_refine(g, sep, eps, seed=seed)
    b = fm_separator_refine(g, sep, eps, subset_size=1, seed=seed)
    c = flow_refine(g, sep, eps)
    for out in (a, b, c):
        assert out.size <= sep.size
        assert separator_ok(g, out.assignment, eps)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=11), st.sampled_from([0.0, 0.3, 1.0]), st.integers(0, 10_000))
def test_flow_value_matches_region_enumeration(g, eps, seed):
    sep = _random_balanced_separator(g, eps, random.Random(seed))
    if sep is None or sep.size == 0 or not sep.is_balanced(g, eps):
        return
    fn = build_flow_problem(g, sep, eps)
    value, cut = node_capacitated_maxflow(fn)
    assert value == brute_region_cut(g, fn.region, fn.left_border, fn.right_border)
    assert value == int(g.node_weight[list(cut)].sum()) if cut else value == 0
