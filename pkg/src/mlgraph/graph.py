"""Weighted undirected graphs in compressed sparse row form, plus the
clustering/partition containers and the contraction machinery that the
multilevel algorithms are built on."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

# Largest total (node or edge) weight accepted; leaves headroom for sentinels.
MAX_TOTAL_WEIGHT = 1 << 60


def max_block_weight(total_weight: int, k: int, eps: float) -> int:
    """Largest admissible integer block weight, ``floor((1+eps) * ceil(total/k))``.

    ``eps`` goes through its decimal representation so that e.g. 0.03 is
    treated as exactly 3/100 rather than its binary approximation.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    avg = -(-int(total_weight) // k)
    return int((1 + Fraction(repr(float(eps)))) * avg)


def _weighted_count(labels: np.ndarray, weights: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.int64)
    np.add.at(out, labels, weights)
    return out


class Graph:
    """Immutable undirected graph with positive integer node and edge weights.

    Each undirected edge is stored as two arcs. Targets are sorted within each
    node's adjacency range, so arcs ``(u, v)`` with ``u < v`` enumerate the
    edges in canonical lexicographic order.
    """

    def __init__(self, offsets, targets, node_weight, edge_weight):
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.node_weight = np.asarray(node_weight, dtype=np.int64)
        self.edge_weight = np.asarray(edge_weight, dtype=np.int64)
        for arr in (self.offsets, self.targets, self.node_weight, self.edge_weight):
            arr.setflags(write=False)

    # construction -----------------------------------------------------

    @classmethod
    def from_arcs(cls, n: int, src, dst, weights=None, node_weights=None) -> "Graph":
        """Build from directed arcs. Self-loops are dropped, parallel arcs are
        merged by summing weights, and the result must be symmetric."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst differ in length")
        w = np.ones_like(src) if weights is None else np.asarray(weights, dtype=np.int64).ravel()
        nw = np.ones(n, dtype=np.int64) if node_weights is None else np.asarray(node_weights, dtype=np.int64)
        if nw.shape != (n,):
            raise ValueError("node_weights must have length n")
        if len(src) and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise ValueError("arc endpoint out of range")
        if (w < 1).any():
            raise ValueError("edge weights must be >= 1")
        if (nw < 1).any():
            raise ValueError("node weights must be >= 1")
        if int(nw.sum()) >= MAX_TOTAL_WEIGHT:
            raise ValueError("total node weight too large")

        keep = src != dst
        src, dst, w = src[keep], dst[keep], w[keep]
        key = src * n + dst
        uniq, inverse = np.unique(key, return_inverse=True)
        merged = np.bincount(inverse, weights=w, minlength=len(uniq)) if len(uniq) else np.zeros(0)
        # bincount goes through float64; redo exactly when that could lose precision
        if len(uniq) and merged.max() >= 2**52:
            merged = np.zeros(len(uniq), dtype=np.int64)
            np.add.at(merged, inverse, w)
        merged = merged.astype(np.int64)
        usrc = uniq // n if n else uniq
        udst = uniq % n if n else uniq

        rkey = udst * n + usrc
        pos = np.searchsorted(uniq, rkey)
        pos_c = np.minimum(pos, max(len(uniq) - 1, 0))
        ok = (pos < len(uniq)) & (uniq[pos_c] == rkey) if len(uniq) else np.zeros(0, dtype=bool)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise AsymmetricAdjacencyError(int(usrc[bad]), int(udst[bad]))
        if (merged[pos_c] != merged).any():
            bad = int(np.flatnonzero(merged[pos_c] != merged)[0])
            raise AsymmetricAdjacencyError(int(usrc[bad]), int(udst[bad]), weight=True)
        if int(merged.sum()) // 2 >= MAX_TOTAL_WEIGHT:
            raise ValueError("total edge weight too large")

        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(usrc, minlength=n), out=offsets[1:])
        return cls(offsets, udst, nw, merged)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], weights=None, node_weights=None) -> "Graph":
        """Build from an undirected edge list (each edge listed once)."""
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e), dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        return cls.from_arcs(n, src, dst, np.concatenate([w, w]), node_weights)

    # basic queries ----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def m(self) -> int:
        return len(self.targets) // 2

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def arc_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())

    @cached_property
    def total_node_weight(self) -> int:
        return int(self.node_weight.sum())

    @cached_property
    def total_edge_weight(self) -> int:
        return int(self.edge_weight.sum()) // 2

    @cached_property
    def adj(self) -> list[list[tuple[int, int]]]:
        """Python-level adjacency ``adj[v] = [(u, w), ...]`` for the hot loops."""
        t = self.targets.tolist()
        w = self.edge_weight.tolist()
        o = self.offsets.tolist()
        return [list(zip(t[o[v]:o[v + 1]], w[o[v]:o[v + 1]])) for v in range(self.n)]

    @cached_property
    def weights(self) -> list[int]:
        return self.node_weight.tolist()

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Undirected edges ``(u, v, w)`` with ``u < v`` in canonical order."""
        src = self.arc_sources()
        mask = src < self.targets
        yield from zip(src[mask].tolist(), self.targets[mask].tolist(), self.edge_weight[mask].tolist())

    def edge_array(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = self.arc_sources()
        mask = src < self.targets
        return src[mask], self.targets[mask], self.edge_weight[mask]

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Node-induced subgraph; node ``nodes[i]`` becomes node ``i``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        local = np.full(self.n, -1, dtype=np.int64)
        local[nodes] = np.arange(len(nodes))
        src = self.arc_sources()
        ls, lt = local[src], local[self.targets]
        keep = (ls >= 0) & (lt >= 0)
        return Graph.from_arcs(len(nodes), ls[keep], lt[keep], self.edge_weight[keep], self.node_weight[nodes])

    def with_unit_node_weights(self) -> "Graph":
        return Graph(self.offsets, self.targets, np.ones(self.n, dtype=np.int64), self.edge_weight)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.node_weight, other.node_weight)
            and np.array_equal(self.edge_weight, other.edge_weight)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class AsymmetricAdjacencyError(ValueError):
    def __init__(self, u: int, v: int, weight: bool = False):
        self.u, self.v = u, v
        what = "weight mismatch on" if weight else "missing back-arc for"
        super().__init__(f"asymmetric adjacency: {what} arc ({u}, {v})")


@dataclass
class Clustering:
    assignment: np.ndarray
    cluster_weight: np.ndarray
    num_clusters: int

    @classmethod
    def from_labels(cls, g: Graph, labels) -> "Clustering":
        """Compact arbitrary labels to ``0..c-1`` (in order of first label value)."""
        _, inverse = np.unique(np.asarray(labels, dtype=np.int64), return_inverse=True)
        inverse = inverse.astype(np.int64).ravel()
        cw = _weighted_count(inverse, g.node_weight, int(inverse.max()) + 1 if g.n else 0)
        return cls(inverse, cw, len(cw))


@dataclass
class Partition:
    k: int
    eps: float
    assignment: np.ndarray
    block_weight: np.ndarray

    @classmethod
    def from_assignment(cls, g: Graph, assignment, k: int, eps: float) -> "Partition":
        a = np.asarray(assignment, dtype=np.int64).copy()
        if a.shape != (g.n,):
            raise ValueError(f"assignment has {a.size} entries, graph has {g.n} nodes")
        if g.n and (a.min() < 0 or a.max() >= k):
            raise ValueError("block id out of range")
        return cls(k, float(eps), a, _weighted_count(a, g.node_weight, k))

    @property
    def max_block_weight(self) -> int:
        return max_block_weight(int(self.block_weight.sum()), self.k, self.eps)

    def is_balanced(self) -> bool:
        return bool(self.block_weight.max(initial=0) <= self.max_block_weight)

    def copy(self) -> "Partition":
        return Partition(self.k, self.eps, self.assignment.copy(), self.block_weight.copy())


@dataclass
class Hierarchy:
    """``levels[0]`` is the input graph; ``maps[i]`` sends nodes of
    ``levels[i]`` to nodes of ``levels[i+1]``."""

    levels: list[Graph]
    maps: list[np.ndarray] = field(default_factory=list)

    @property
    def coarsest(self) -> Graph:
        return self.levels[-1]

    def __len__(self) -> int:
        return len(self.levels)


def contract(g: Graph, clustering: Clustering | Sequence[int] | np.ndarray) -> tuple[Graph, np.ndarray]:
    """Collapse every cluster into one node.

    Coarse node weights are cluster weights, parallel inter-cluster edges are
    merged by summing weights, intra-cluster edges disappear.
    """
    labels = clustering.assignment if isinstance(clustering, Clustering) else clustering
    _, cmap = np.unique(np.asarray(labels, dtype=np.int64), return_inverse=True)
    cmap = cmap.astype(np.int64).ravel()
    nc = int(cmap.max()) + 1 if g.n else 0
    cw = _weighted_count(cmap, g.node_weight, nc)
    cu = cmap[g.arc_sources()]
    cv = cmap[g.targets]
    return Graph.from_arcs(nc, cu, cv, g.edge_weight, cw), cmap


def project_partition(coarse_p: Partition, coarse_map: np.ndarray) -> Partition:
    """Carry a coarse partition to the finer level: every fine node inherits
    the block of its coarse node. Block weights are unchanged."""
    return Partition(
        coarse_p.k,
        coarse_p.eps,
        np.asarray(coarse_p.assignment)[np.asarray(coarse_map)],
        coarse_p.block_weight.copy(),
    )


def cut_value(g: Graph, p: Partition | np.ndarray | Sequence[int]) -> int:
    a = np.asarray(p.assignment if isinstance(p, Partition) else p)
    crossing = a[g.arc_sources()] != a[g.targets]
    return int(g.edge_weight[crossing].sum()) // 2
