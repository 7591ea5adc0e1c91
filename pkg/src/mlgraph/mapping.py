"""Top-down process mapping onto a homogeneous machine hierarchy.

A hierarchy ``(a1, ..., ak)`` reads as ``a1`` cores per processor, ``a2``
processors per node and so on. PE ids are mixed-radix numbers with ``a1`` as
the least significant digit. The communication graph is split into ``ak``
equally sized groups, each group into ``a(k-1)`` groups and so forth until
groups of ``a1`` tasks remain, which occupy consecutive PEs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graph import Graph, Partition
from .multilevel import PartitionConfig, partition


@dataclass(frozen=True)
class HierarchySpec:
    factors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(a) for a in self.factors))
        if not self.factors:
            raise ValueError("hierarchy needs at least one level")
        if any(a < 1 for a in self.factors):
            raise ValueError("hierarchy factors must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "HierarchySpec":
        """Parse ``a1:a2:...:ak``."""
        try:
            return cls(tuple(int(t) for t in text.split(":")))
        except ValueError:
            raise ValueError(f"bad hierarchy {text!r}; expected a1:a2:...:ak with integers >= 1") from None

    @property
    def num_pes(self) -> int:
        return math.prod(self.factors)

    def digits(self, pe: int) -> list[int]:
        out = []
        for a in self.factors:
            pe, d = divmod(pe, a)
            out.append(d)
        return out

    def distance(self, p: int, q: int) -> int:
        """Highest (1-based) hierarchy level at which ``p`` and ``q`` differ; 0 if equal."""
        level = 0
        for i, a in enumerate(self.factors, start=1):
            if p % a != q % a:
                level = i
            p //= a
            q //= a
        return level


@dataclass
class ProcessMapping:
    sigma: np.ndarray  # task -> PE

    def is_bijection(self, num_pes: int) -> bool:
        s = np.asarray(self.sigma)
        return len(s) == num_pes and np.array_equal(np.sort(s), np.arange(num_pes))


def _repair(g: Graph, labels: np.ndarray, parts: int) -> np.ndarray:
    """Move nodes out of overfull blocks until every block holds exactly
    ``n/parts`` nodes, always taking the node (and target) that loses the
    least connection."""
    size = g.n // parts
    labels = labels.copy()
    counts = np.bincount(labels, minlength=parts)
    adj = g.adj
    while (counts > size).any():
        over = [b for b in range(parts) if counts[b] > size]
        under = [b for b in range(parts) if counts[b] < size]
        best = None
        for v in np.flatnonzero(np.isin(labels, over)).tolist():
            conn = np.zeros(parts, dtype=np.int64)
            for u, w in adj[v]:
                conn[labels[u]] += w
            for b in under:
                delta = conn[labels[v]] - conn[b]
                if best is None or delta < best[0]:
                    best = (delta, v, b)
        _, v, b = best
        counts[labels[v]] -= 1
        counts[b] += 1
        labels[v] = b
    return labels


def _split(g: Graph, parts: int, cfg: PartitionConfig, seed: int) -> np.ndarray:
    if parts == 1:
        return np.zeros(g.n, dtype=np.int64)
    p: Partition = partition(g, replace(cfg, k=parts, eps=0.0, coarsen_stop=None, seed=seed))
    return _repair(g, np.asarray(p.assignment), parts)


def top_down_map(comm: Graph, spec: HierarchySpec, cfg: PartitionConfig | None = None) -> ProcessMapping:
    """Map tasks to PEs by recursive perfectly balanced partitioning.

    Node weights are ignored: every task counts once, so that groups match
    the PE counts of the hierarchy exactly.
    """
    if comm.n != spec.num_pes:
        raise ValueError(f"graph has {comm.n} tasks but the hierarchy has {spec.num_pes} PEs")
    cfg = cfg or PartitionConfig()
    g = comm.with_unit_node_weights()
    sigma = np.zeros(g.n, dtype=np.int64)
    rng = np.random.default_rng(cfg.seed)

    def recurse(nodes: np.ndarray, level: int, base: int) -> None:
        # ``nodes`` fill PEs base .. base + len(nodes) - 1
        if level == 0:
            sigma[nodes] = base + np.arange(len(nodes))
            return
        parts = spec.factors[level]
        sub = g.subgraph(nodes)
        labels = _split(sub, parts, cfg, int(rng.integers(2**63)))
        stride = len(nodes) // parts
        for b in range(parts):
            recurse(nodes[labels == b], level - 1, base + b * stride)

    recurse(np.arange(g.n, dtype=np.int64), len(spec.factors) - 1, 0)
    return ProcessMapping(sigma)


def comm_cost(comm: Graph, mapping: ProcessMapping | Sequence[int], spec: HierarchySpec) -> int:
    sigma = np.asarray(mapping.sigma if isinstance(mapping, ProcessMapping) else mapping, dtype=np.int64)
    u, v, w = comm.edge_array()
    p, q = sigma[u], sigma[v]
    level = np.zeros(len(u), dtype=np.int64)
    for i, a in enumerate(spec.factors, start=1):
        level[(p % a) != (q % a)] = i
        p, q = p // a, q // a
    return int((w * level).sum())
