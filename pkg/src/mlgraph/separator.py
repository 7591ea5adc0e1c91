"""Balanced node separators.

A separator labels every node ``V1`` (0), ``V2`` (1) or ``S`` (2) such that no
edge joins ``V1`` and ``V2`` and neither side exceeds
``(1+eps) * ceil(c(V)/2)``. The multilevel driver bisects the coarsest graph,
turns the bisection into a separator and improves it on every level with an
FM-style search over separator nodes (global, then localized) followed by a
max-flow step on a region grown around the separator.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import InfeasibleError
from .graph import Graph, Partition, max_block_weight
from .multilevel import PartitionConfig, _with_seed, coarsen, initial_partition, refine
from .rng import make_rng, spawn

V1, V2, SEP = 0, 1, 2


@dataclass
class Separator:
    assignment: np.ndarray
    weights: np.ndarray  # [c(V1), c(V2), c(S)]

    @classmethod
    def from_labels(cls, g: Graph, labels) -> "Separator":
        a = np.asarray(labels, dtype=np.int64).copy()
        if a.shape != (g.n,):
            raise ValueError(f"separator has {a.size} labels, graph has {g.n} nodes")
        if g.n and (a.min() < 0 or a.max() > SEP):
            raise ValueError("separator labels must be 0, 1 or 2")
        w = np.zeros(3, dtype=np.int64)
        np.add.at(w, a, g.node_weight)
        return cls(a, w)

    @property
    def size(self) -> int:
        """Total weight of the separator nodes."""
        return int(self.weights[SEP])

    def nodes(self) -> np.ndarray:
        return np.flatnonzero(self.assignment == SEP)

    def is_valid(self, g: Graph) -> bool:
        a = self.assignment
        la, lb = a[g.arc_sources()], a[g.targets]
        return not bool(((la == V1) & (lb == V2)).any())

    def is_balanced(self, g: Graph, eps: float) -> bool:
        return int(max(self.weights[V1], self.weights[V2])) <= max_block_weight(g.total_node_weight, 2, eps)

    def copy(self) -> "Separator":
        return Separator(self.assignment.copy(), self.weights.copy())


def derive_separator(g: Graph, p: Partition) -> Separator:
    """Separator from a bisection: the lighter of the two boundary sets moves
    into ``S`` (the ``V1`` boundary on ties)."""
    if p.k != 2:
        raise ValueError("derive_separator needs a bisection")
    a = np.asarray(p.assignment)
    src, dst = g.arc_sources(), g.targets
    crossing = a[src] != a[dst]
    boundary = np.zeros(g.n, dtype=bool)
    boundary[src[crossing]] = True
    b1 = boundary & (a == 0)
    b2 = boundary & (a == 1)
    chosen = b1 if g.node_weight[b1].sum() <= g.node_weight[b2].sum() else b2
    labels = a.copy()
    labels[chosen] = SEP
    return Separator.from_labels(g, labels)


# --------------------------------------------------------------------------
# FM over separator nodes


def _fm_separator_search(
    g: Graph,
    labels: list[int],
    w3: list[int],
    lmax: int,
    start: Sequence[int],
    rng,
    on_move: Callable | None = None,
) -> bool:
    """One FM search seeded with the separator nodes ``start``; modifies
    ``labels``/``w3`` in place and returns whether the separator improved.

    Moving ``v`` from ``S`` into side ``i`` pulls its neighbors from the other
    side into ``S``; its gain is ``c(v)`` minus their weight.
    """
    adj, nw = g.adj, g.weights

    def gain(v: int, side: int) -> int:
        other = 1 - side
        return nw[v] - sum(nw[u] for u, _ in adj[v] if labels[u] == other)

    heaps: list[list] = [[], []]
    eligible: set[int] = set()

    def push(v: int) -> None:
        for side in (V1, V2):
            heapq.heappush(heaps[side], (-gain(v, side), rng.random(), v))

    for v in start:
        if labels[v] == SEP and v not in eligible:
            eligible.add(v)
            push(v)

    deferred: list[list] = [[], []]
    log: list[tuple[int, int, list[int]]] = []
    best_key = (w3[SEP], max(w3[V1], w3[V2]))
    best_len = 0
    limit = max(50, len(labels) // 10)
    since_best = 0

    while True:
        tops: list[tuple[int, int] | None] = [None, None]
        for side in (V1, V2):
            heap = heaps[side]
            while heap:
                neg, _, v = heap[0]
                if v not in eligible:
                    heapq.heappop(heap)
                    continue
                cur = gain(v, side)
                if cur != -neg:
                    heapq.heapreplace(heap, (-cur, rng.random(), v))
                    continue
                if w3[side] + nw[v] > lmax:
                    deferred[side].append(heapq.heappop(heap))
                    continue
                tops[side] = (cur, v)
                break
        if tops[V1] is None and tops[V2] is None:
            break
        if tops[V1] is None:
            side = V2
        elif tops[V2] is None:
            side = V1
        elif tops[V1][0] != tops[V2][0]:
            side = V1 if tops[V1][0] > tops[V2][0] else V2
        else:
            side = V1 if rng.random() < 0.5 else V2
        gv, v = tops[side]
        other = 1 - side
        heapq.heappop(heaps[side])
        eligible.discard(v)
        labels[v] = side
        w3[SEP] -= nw[v]
        w3[side] += nw[v]
        pulled = [u for u, _ in adj[v] if labels[u] == other]
        for u in pulled:
            labels[u] = SEP
            w3[other] -= nw[u]
            w3[SEP] += nw[u]
        log.append((v, side, pulled))
        if on_move is not None:
            on_move(v, side, pulled, w3)

        touched = {u for u, _ in adj[v] if labels[u] == SEP and u in eligible}
        for u in pulled:
            eligible.add(u)
            touched.add(u)
            touched.update(x for x, _ in adj[u] if labels[x] == SEP and x in eligible)
        for u in touched:
            push(u)
        for s in (V1, V2):
            for entry in deferred[s]:
                heapq.heappush(heaps[s], entry)
            deferred[s].clear()

        key = (w3[SEP], max(w3[V1], w3[V2]))
        if key < best_key:
            best_key, best_len, since_best = key, len(log), 0
        else:
            since_best += 1
            if since_best > limit:
                break

    for v, side, pulled in reversed(log[best_len:]):
        other = 1 - side
        for u in pulled:
            labels[u] = other
            w3[SEP] -= nw[u]
            w3[other] += nw[u]
        labels[v] = SEP
        w3[side] -= nw[v]
        w3[SEP] += nw[v]
    return best_len > 0


def fm_separator_refine(
    g: Graph,
    sep: Separator,
    eps: float,
    subset_size: int | None = None,
    seed: int = 0,
    *,
    restarts: int = 5,
    max_rounds: int = 10,
    on_move: Callable | None = None,
) -> Separator:
    """Improve ``sep`` by FM over separator nodes; never increases ``c(S)``.

    With ``subset_size=None`` (or at least ``|S|``) every search starts from
    all separator nodes. Otherwise each round runs ``restarts`` searches, each
    seeded with a fresh random subset of ``subset_size`` separator nodes, and
    rounds repeat until one brings no improvement.
    """
    lmax = max_block_weight(g.total_node_weight, 2, eps)
    labels = sep.assignment.tolist()
    w3 = sep.weights.tolist()
    rng = make_rng(seed)
    for _ in range(max_rounds):
        current = [v for v, lab in enumerate(labels) if lab == SEP]
        if not current:
            break
        if subset_size is None or subset_size >= len(current):
            improved = _fm_separator_search(g, labels, w3, lmax, current, rng, on_move)
        else:
            improved = False
            for _ in range(restarts):
                current = [v for v, lab in enumerate(labels) if lab == SEP]
                if not current:
                    break
                subset = rng.sample(current, min(subset_size, len(current)))
                improved |= _fm_separator_search(g, labels, w3, lmax, subset, rng, on_move)
        if not improved:
            break
    return Separator(np.asarray(labels, dtype=np.int64), np.asarray(w3, dtype=np.int64))


# --------------------------------------------------------------------------
# flow-based improvement


@dataclass
class FlowNetwork:
    """Node-capacitated s-t network on the region ``A`` (global ids in
    ``region``). ``arcs`` are directed pairs of local indices with unbounded
    capacity; ``source_arcs``/``sink_arcs`` list the local indices joined to
    s and t."""

    region: np.ndarray
    capacity: np.ndarray
    arcs: list[tuple[int, int]]
    source_arcs: list[int]
    sink_arcs: list[int]
    inf: int

    @property
    def left_border(self) -> set[int]:
        return {int(self.region[i]) for i in self.source_arcs}

    @property
    def right_border(self) -> set[int]:
        return {int(self.region[i]) for i in self.sink_arcs}


def _bfs_layers(g: Graph, labels, start: Sequence[int], side: int, budget: int) -> tuple[list[int], list[int]]:
    """Whole BFS layers of ``side`` nodes around ``start`` whose accumulated
    weight stays within ``budget``. Returns (added nodes, outermost layer)."""
    adj, nw = g.adj, g.weights
    seen = set(start)
    frontier = list(start)
    added: list[int] = []
    last: list[int] = []
    used = 0
    while frontier:
        layer = []
        for v in frontier:
            for u, _ in adj[v]:
                if u not in seen and labels[u] == side:
                    seen.add(u)
                    layer.append(u)
        if not layer:
            break
        lw = sum(nw[u] for u in layer)
        if used + lw > budget:
            break
        used += lw
        added.extend(layer)
        last = layer
        frontier = layer
    return added, last


def build_flow_problem(g: Graph, sep: Separator, eps: float) -> FlowNetwork:
    """Grow a region around ``S`` by BFS into both sides and set up the flow
    network whose minimum vertex cuts are the separators inside the region.

    The BFS into side ``i`` may take at most ``c(V_i) + L_max - c(V)`` weight:
    then the nodes of ``V_i`` outside the region alone keep the opposite side
    of any separator found in the region within ``L_max``. s is joined to
    region nodes adjacent to ``V1`` outside the region and to the outermost
    ``V1`` layer, t likewise for ``V2``.
    """
    if sep.size == 0:
        raise ValueError("separator is empty; nothing to improve")
    labels = sep.assignment.tolist()
    total = g.total_node_weight
    lmax = max_block_weight(total, 2, eps)
    s_nodes = [v for v, lab in enumerate(labels) if lab == SEP]
    region = list(s_nodes)
    outer: list[list[int]] = []
    for side in (V1, V2):
        budget = int(sep.weights[side]) + lmax - total
        added, last = _bfs_layers(g, labels, s_nodes, side, budget) if budget > 0 else ([], [])
        region.extend(added)
        outer.append(last)
    region.sort()
    local = {v: i for i, v in enumerate(region)}

    arcs: list[tuple[int, int]] = []
    touches = [[False] * len(region), [False] * len(region)]
    for i, v in enumerate(region):
        for u, _ in g.adj[v]:
            j = local.get(u)
            if j is not None:
                arcs.append((i, j))
            elif labels[u] in (V1, V2):
                touches[labels[u]][i] = True
    borders = []
    for side in (V1, V2):
        b = {i for i in range(len(region)) if touches[side][i]}
        b.update(local[v] for v in outer[side])
        borders.append(sorted(b))
    reg = np.asarray(region, dtype=np.int64)
    return FlowNetwork(
        region=reg,
        capacity=g.node_weight[reg].copy() if len(reg) else np.zeros(0, dtype=np.int64),
        arcs=arcs,
        source_arcs=borders[V1],
        sink_arcs=borders[V2],
        inf=total + 1,
    )


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, a: int, b: int, c: int) -> None:
        self.head[a].append(len(self.to))
        self.to.append(b)
        self.cap.append(c)
        self.head[b].append(len(self.to))
        self.to.append(a)
        self.cap.append(0)

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for e in self.head[v]:
                if self.cap[e] > 0 and level[self.to[e]] < 0:
                    level[self.to[e]] = level[v] + 1
                    q.append(self.to[e])
        return level if level[t] >= 0 else None

    def maxflow(self, s: int, t: int) -> int:
        flow = 0
        while (level := self._levels(s, t)) is not None:
            it = [0] * self.n
            while True:
                pushed = self._augment(s, t, level, it)
                if not pushed:
                    break
                flow += pushed
        return flow

    def _augment(self, s: int, t: int, level: list[int], it: list[int]) -> int:
        # iterative DFS along the level graph
        path: list[int] = []
        v = s
        while True:
            if v == t:
                f = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= f
                    self.cap[e ^ 1] += f
                return f
            advanced = False
            while it[v] < len(self.head[v]):
                e = self.head[v][it[v]]
                u = self.to[e]
                if self.cap[e] > 0 and level[u] == level[v] + 1:
                    path.append(e)
                    v = u
                    advanced = True
                    break
                it[v] += 1
            if not advanced:
                if v == s:
                    return 0
                level[v] = -1
                e = path.pop()
                v = self.to[e ^ 1]
                it[v] += 1

    def reachable(self, s: int, reverse: bool = False) -> list[bool]:
        """Residual reachability from ``s`` (or, with ``reverse``, to ``s``)."""
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            v = q.popleft()
            for e in self.head[v]:
                u = self.to[e]
                residual = self.cap[e ^ 1] if reverse else self.cap[e]
                if residual > 0 and not seen[u]:
                    seen[u] = True
                    q.append(u)
        return seen


def _solve(fn: FlowNetwork) -> tuple[int, _Dinic]:
    r = len(fn.region)
    s, t = 2 * r, 2 * r + 1
    net = _Dinic(2 * r + 2)
    for i in range(r):
        net.add(2 * i, 2 * i + 1, int(fn.capacity[i]))
    for a, b in fn.arcs:
        net.add(2 * a + 1, 2 * b, fn.inf)
    for i in fn.source_arcs:
        net.add(s, 2 * i, fn.inf)
    for i in fn.sink_arcs:
        net.add(2 * i + 1, t, fn.inf)
    return net.maxflow(s, t), net


def _vertex_cut(fn: FlowNetwork, net: _Dinic, side: str) -> set[int]:
    r = len(fn.region)
    if side == "source":
        reach = net.reachable(2 * r)
        return {int(fn.region[i]) for i in range(r) if reach[2 * i] and not reach[2 * i + 1]}
    reach = net.reachable(2 * r + 1, reverse=True)
    return {int(fn.region[i]) for i in range(r) if reach[2 * i + 1] and not reach[2 * i]}


def node_capacitated_maxflow(fn: FlowNetwork, side: str = "source") -> tuple[int, set[int]]:
    """Maximum s-t flow under node capacities, by node splitting.

    Returns the flow value and a minimum vertex cut: the region nodes whose
    split arc crosses the min cut closest to s (``side="source"``) or to t
    (``side="sink"``).
    """
    if side not in ("source", "sink"):
        raise ValueError("side must be 'source' or 'sink'")
    value, net = _solve(fn)
    return value, _vertex_cut(fn, net, side)


def _separator_from_cut(g: Graph, sep: Separator, fn: FlowNetwork, cut: set[int]) -> Separator:
    labels = sep.assignment.copy()
    in_region = set(fn.region.tolist())
    start = [v for v in fn.left_border if v not in cut]
    reach = set(start)
    q = deque(start)
    while q:
        v = q.popleft()
        for u, _ in g.adj[v]:
            if u in in_region and u not in cut and u not in reach:
                reach.add(u)
                q.append(u)
    for v in in_region:
        labels[v] = SEP if v in cut else (V1 if v in reach else V2)
    return Separator.from_labels(g, labels)


def flow_refine(g: Graph, sep: Separator, eps: float) -> Separator:
    """Replace ``S`` by the cheapest separator inside the flow region.

    Both the source-side and the sink-side minimum cut are tried; a candidate
    is taken when it is valid, balanced and either lighter than ``S`` or
    equally heavy with a better balance.
    """
    if sep.size == 0:
        return sep.copy()
    fn = build_flow_problem(g, sep, eps)
    value, net = _solve(fn)
    if value > sep.size:
        return sep.copy()
    best = sep
    best_key = (sep.size, int(max(sep.weights[V1], sep.weights[V2])))
    for side in ("source", "sink"):
        cand = _separator_from_cut(g, sep, fn, _vertex_cut(fn, net, side))
        if not (cand.is_valid(g) and cand.is_balanced(g, eps)):
            continue
        key = (cand.size, int(max(cand.weights[V1], cand.weights[V2])))
        if key < best_key:
            best, best_key = cand, key
    return best.copy()


# --------------------------------------------------------------------------


def project_separator(coarse: Separator, fine: Graph, coarse_map: np.ndarray) -> Separator:
    return Separator.from_labels(fine, np.asarray(coarse.assignment)[np.asarray(coarse_map)])


def refine_separator(g: Graph, sep: Separator, eps: float, seed: int, restarts: int = 5) -> Separator:
    s1, s2 = spawn(seed, 2)
    sep = fm_separator_refine(g, sep, eps, None, s1)
    subset = max(1, math.ceil(len(sep.nodes()) / 4))
    sep = fm_separator_refine(g, sep, eps, subset, s2, restarts=restarts)
    return flow_refine(g, sep, eps)


def multilevel_separator(g: Graph, eps: float, cfg: PartitionConfig | None = None) -> Separator:
    """Coarsen, bisect the coarsest graph, derive a separator and refine it
    on every level while projecting back to ``g``."""
    cfg = PartitionConfig(k=2, eps=eps) if cfg is None else replace(cfg, k=2, eps=eps, coarsen_stop=None)
    lmax = cfg.lmax(g)
    if g.n and int(g.node_weight.max()) > lmax:
        raise InfeasibleError(f"node weight {int(g.node_weight.max())} exceeds L_max={lmax}")
    s_coarsen, s_init, s_refine = spawn(cfg.seed, 3)
    hier = coarsen(g, _with_seed(cfg, s_coarsen))
    for level in range(len(hier) - 1, -1, -1):
        try:
            p = initial_partition(hier.levels[level], cfg, s_init)
        except InfeasibleError:
            if level == 0:
                raise
            continue
        break
    seeds = spawn(s_refine, 2 * (level + 1))
    p = refine(hier.levels[level], p, cfg, seeds[-1])
    sep = derive_separator(hier.levels[level], p)
    for lvl in range(level, -1, -1):
        if lvl < level:
            sep = project_separator(sep, hier.levels[lvl], hier.maps[lvl])
        sep = refine_separator(hier.levels[lvl], sep, eps, seeds[lvl])
    return sep
