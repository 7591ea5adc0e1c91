"""Size-constrained label propagation (SCLaP).

The same sweep serves two purposes: with singleton start labels and a size
bound ``U`` it computes the clusterings that drive coarsening, and started
from a balanced partition with bound ``L_max`` it is a cheap, cut-monotone
local search.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .graph import Clustering, Graph, Partition
from .rng import make_rng

NODE_ORDERS = ("random", "ascending-degree")

MoveHook = Callable[[int, int, int, Sequence[int]], None]


def _node_order(g: Graph, rng, order: str) -> list[int]:
    nodes = list(range(g.n))
    if order == "random":
        rng.shuffle(nodes)
    elif order == "ascending-degree":
        deg = g.degrees().tolist()
        keys = [rng.random() for _ in nodes]
        nodes.sort(key=lambda v: (deg[v], keys[v]))
    else:
        raise ValueError(f"unknown node order {order!r}; expected one of {NODE_ORDERS}")
    return nodes


def propagate(
    g: Graph,
    labels: list[int],
    label_weight: list[int],
    bound: int,
    rounds: int,
    rng,
    *,
    clustering: bool,
    region: Sequence[int] | None = None,
    order: str = "random",
    on_move: MoveHook | None = None,
) -> int:
    """Run up to ``rounds`` label propagation sweeps in place.

    A visited node joins the eligible label (post-move weight <= ``bound``, or
    its own label) with the largest connection weight. Labels change during a
    sweep as soon as a node moves. With ``region`` set, only neighbors in the
    same region contribute connection weight, so labels never spread across
    region boundaries. Returns the number of moves made.

    ``clustering`` selects the tie rule: when the own label is among the best,
    refinement stays put, while clustering also accepts a move to an equally
    connected label that is at least as heavy as the current one.
    """
    adj = g.adj
    nw = g.weights
    total_moves = 0
    for _ in range(rounds):
        moves = 0
        for v in _node_order(g, rng, order):
            own = labels[v]
            wv = nw[v]
            conn: dict[int, int] = {}
            if region is None:
                for u, w in adj[v]:
                    lu = labels[u]
                    conn[lu] = conn.get(lu, 0) + w
            else:
                rv = region[v]
                for u, w in adj[v]:
                    if region[u] == rv:
                        lu = labels[u]
                        conn[lu] = conn.get(lu, 0) + w
            if not conn:
                continue
            best = conn.get(own, 0)
            cands = [own]
            for lab, c in conn.items():
                if lab == own or label_weight[lab] + wv > bound:
                    continue
                if c > best:
                    best, cands = c, [lab]
                elif c == best:
                    cands.append(lab)
            if cands[0] == own:
                if len(cands) == 1 or not clustering:
                    continue
                own_w = label_weight[own]
                cands = [lab for lab in cands[1:] if label_weight[lab] >= own_w]
                if not cands:
                    continue
            target = cands[0] if len(cands) == 1 else cands[rng.randrange(len(cands))]
            labels[v] = target
            label_weight[own] -= wv
            label_weight[target] += wv
            moves += 1
            if on_move is not None:
                on_move(v, own, target, label_weight)
        total_moves += moves
        if moves == 0:
            break
    return total_moves


def sclap_cluster(
    g: Graph,
    size_bound: int,
    rounds: int = 3,
    seed: int = 0,
    *,
    region: Sequence[int] | None = None,
    order: str = "random",
    on_move: MoveHook | None = None,
) -> Clustering:
    """Cluster ``g`` so that no cluster weighs more than ``size_bound``.

    Every node starts in its own cluster. Cluster ids of the result are
    compacted to ``0..num_clusters-1``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if g.n and size_bound < int(g.node_weight.max()):
        raise ValueError(f"size bound {size_bound} is below the heaviest node weight {int(g.node_weight.max())}")
    labels = list(range(g.n))
    label_weight = list(g.weights)
    region_list = None if region is None else list(np.asarray(region).tolist())
    propagate(
        g, labels, label_weight, size_bound, rounds, make_rng(seed),
        clustering=True, region=region_list, order=order, on_move=on_move,
    )
    return Clustering.from_labels(g, labels)


def sclap_refine(
    g: Graph,
    p: Partition,
    rounds: int = 3,
    seed: int = 0,
    *,
    order: str = "random",
    on_move: MoveHook | None = None,
) -> Partition:
    """Label propagation over blocks with bound ``L_max``; never increases the cut."""
    if not p.is_balanced():
        raise ValueError("sclap_refine requires a balanced partition")
    if p.k == 1 or g.n == 0:
        return p.copy()
    labels = p.assignment.tolist()
    bw = p.block_weight.tolist()
    propagate(
        g, labels, bw, p.max_block_weight, rounds, make_rng(seed),
        clustering=False, order=order, on_move=on_move,
    )
    return Partition(p.k, p.eps, np.asarray(labels, dtype=np.int64), np.asarray(bw, dtype=np.int64))
