"""Edge partitioning through the split-and-connect (SPAC) graph.

Every node ``v`` of degree ``d`` becomes ``d`` split nodes, one per incident
edge, joined by a cycle of unit-weight auxiliary edges. Each original edge
becomes a heavy dominant edge between the two split nodes that represent it.
A node partition of this graph that keeps dominant edges uncut is an edge
partition whose auxiliary cut counts vertex replicas.

Split nodes are numbered by CSR arc index: the ``i``-th split node of ``v`` is
``offsets[v] + i`` and stands for the arc to ``v``'s ``i``-th neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InfeasibleError
from .graph import Graph
from .multilevel import PartitionConfig, partition


@dataclass
class SpacMapping:
    offsets: np.ndarray  # split nodes of v are offsets[v]..offsets[v+1]-1
    dominant: np.ndarray  # (m, 2) split-node pair per canonical edge, lower index first

    def split_nodes(self, v: int) -> range:
        return range(int(self.offsets[v]), int(self.offsets[v + 1]))


@dataclass
class EdgePartition:
    k: int
    edge_assignment: np.ndarray  # block per canonical edge
    block_edges: np.ndarray
    dominant_cut: int = 0


def reverse_arcs(g: Graph) -> np.ndarray:
    """``rev[a]`` is the index of the arc opposite to arc ``a``."""
    src = g.arc_sources()
    key = src * g.n + g.targets  # CSR order makes this sorted
    return np.searchsorted(key, g.targets * g.n + src)


def build_spac(g: Graph) -> tuple[Graph, SpacMapping]:
    deg = g.degrees()
    n2 = len(g.targets)
    # auxiliary cycles: split node j is joined to its successor within S_v
    src_all = g.arc_sources()
    succ = np.arange(n2) + 1
    last = g.offsets[1:][src_all] - 1  # last split node of the owning node
    succ = np.where(np.arange(n2) == last, g.offsets[:-1][src_all], succ)
    owner_deg = deg[src_all]
    cyc = owner_deg >= 3
    two = (owner_deg == 2) & (np.arange(n2) == g.offsets[:-1][src_all])
    aux_u = np.concatenate([np.arange(n2)[cyc], np.arange(n2)[two]])
    aux_v = np.concatenate([succ[cyc], succ[two]])

    rev = reverse_arcs(g)
    lower = np.flatnonzero(np.arange(n2) < rev)
    dom = np.stack([lower, rev[lower]], axis=1)
    sentinel = 2 * g.m + 1

    eu = np.concatenate([aux_u, dom[:, 0]])
    ev = np.concatenate([aux_v, dom[:, 1]])
    ew = np.concatenate([np.ones(len(aux_u), dtype=np.int64), np.full(len(dom), sentinel, dtype=np.int64)])
    gp = Graph.from_arcs(n2, np.concatenate([eu, ev]), np.concatenate([ev, eu]), np.concatenate([ew, ew]))
    return gp, SpacMapping(g.offsets.copy(), dom)


def edge_partition(g: Graph, k: int, eps: float, cfg: PartitionConfig | None = None) -> EdgePartition:
    """Partition the edges of ``g`` into ``k`` blocks via a node partition of
    the SPAC graph. An edge goes to the block of its lower-indexed split node,
    which also decides the rare edges whose dominant edge got cut."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return EdgePartition(1, np.zeros(g.m, dtype=np.int64), np.array([g.m], dtype=np.int64), 0)
    if k > g.m:
        raise InfeasibleError(f"cannot split {g.m} edges into {k} non-trivial blocks")
    gp, mp = build_spac(g)
    cfg = PartitionConfig(k=k, eps=eps) if cfg is None else replace(cfg, k=k, eps=eps, coarsen_stop=None)
    p = partition(gp, cfg)
    a = np.asarray(p.assignment)
    blocks = a[mp.dominant[:, 0]]
    dominant_cut = int((blocks != a[mp.dominant[:, 1]]).sum())
    return EdgePartition(k, blocks, np.bincount(blocks, minlength=k).astype(np.int64), dominant_cut)


def eval_edge_partition(g: Graph, ep: EdgePartition) -> tuple[float, int]:
    """Replication factor over non-isolated nodes and the largest block size."""
    u, v, _ = g.edge_array()
    b = np.asarray(ep.edge_assignment, dtype=np.int64)
    if b.shape != (g.m,):
        raise ValueError(f"edge partition has {b.size} entries, graph has {g.m} edges")
    pairs = np.unique(np.concatenate([u, v]) * ep.k + np.concatenate([b, b]))
    touched = int((g.degrees() > 0).sum())
    rf = len(pairs) / touched if touched else 0.0
    return rf, int(np.bincount(b, minlength=ep.k).max(initial=0))
