"""Multilevel k-way partitioning.

Coarsening contracts size-constrained label propagation clusterings until the
graph is small, a portfolio of cheap constructions partitions the coarsest
graph, and every level of the uncoarsening is refined with label propagation
followed by k-way FM. :func:`combine` reuses the same scheme with coarsening
restricted to regions that are uncut in both parents.
"""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import InfeasibleError
from .graph import Graph, Hierarchy, Partition, contract, cut_value, max_block_weight, project_partition
from .rng import make_rng, spawn
from .sclap import sclap_cluster, sclap_refine

logger = logging.getLogger(__name__)

# A level counts as stagnant when it keeps more than this fraction of nodes.
STAGNATION_RATIO = 0.95


@dataclass
class PartitionConfig:
    k: int = 2
    eps: float = 0.03
    coarsen_stop: int | None = None  # None -> 20 * k
    cluster_bound_factor: float = 2.0
    rounds: int = 3
    init_attempts: int = 10
    fm_passes: int = 10
    node_order: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.coarsen_stop is None:
            self.coarsen_stop = 20 * self.k
        if self.coarsen_stop < self.k:
            raise ValueError("coarsen_stop must be >= k")
        if self.cluster_bound_factor <= 0:
            raise ValueError("cluster_bound_factor must be positive")
        if self.rounds < 1 or self.init_attempts < 1:
            raise ValueError("rounds and init_attempts must be >= 1")

    def lmax(self, g: Graph) -> int:
        return max_block_weight(g.total_node_weight, self.k, self.eps)


def _cluster_bound(g: Graph, cfg: PartitionConfig) -> int:
    heaviest = int(g.node_weight.max()) if g.n else 1
    return max(int(cfg.lmax(g) / cfg.cluster_bound_factor), heaviest)


def _coarsen(
    g: Graph, cfg: PartitionConfig, region: np.ndarray | None = None, stop: int | None = None
) -> tuple[Hierarchy, list[np.ndarray | None]]:
    stop = cfg.coarsen_stop if stop is None else stop
    bound = _cluster_bound(g, cfg)
    rng = make_rng(cfg.seed)
    hier = Hierarchy([g], [])
    regions: list[np.ndarray | None] = [region]
    current = g
    while current.n > stop:
        clustering = sclap_cluster(
            current, bound, cfg.rounds, rng.getrandbits(63),
            region=regions[-1], order=cfg.node_order,
        )
        if clustering.num_clusters >= current.n:
            break
        coarse, cmap = contract(current, clustering)
        if regions[-1] is not None:
            coarse_region = np.zeros(coarse.n, dtype=np.int64)
            coarse_region[cmap] = regions[-1]
            regions.append(coarse_region)
        else:
            regions.append(None)
        hier.levels.append(coarse)
        hier.maps.append(cmap)
        logger.debug("coarsen: %d -> %d nodes", current.n, coarse.n)
        shrunk_enough = coarse.n <= STAGNATION_RATIO * current.n
        current = coarse
        if not shrunk_enough:
            break
    return hier, regions


def coarsen(g: Graph, cfg: PartitionConfig) -> Hierarchy:
    """Contract SCLaP clusterings (bound ``L_max / cluster_bound_factor``)
    until at most ``coarsen_stop`` nodes remain or a level shrinks by less
    than 5%."""
    return _coarsen(g, cfg)[0]


# --------------------------------------------------------------------------
# initial partitioning


def _random_assign(g: Graph, k: int, lmax: int, rng) -> list[int]:
    nw = g.weights
    bw = [0] * k
    labels = [0] * g.n
    order = list(range(g.n))
    rng.shuffle(order)
    for v in order:
        fits = [b for b in range(k) if bw[b] + nw[v] <= lmax]
        b = fits[rng.randrange(len(fits))] if fits else min(range(k), key=bw.__getitem__)
        labels[v] = b
        bw[b] += nw[v]
    return labels


def _grow(g: Graph, k: int, rng, greedy: bool) -> list[int]:
    """Grow blocks 0..k-2 one after another from random seeds up to their
    share of the remaining weight; block k-1 takes the rest. The BFS variant
    adds nodes in breadth-first order, the greedy one always adds the
    frontier node with the heaviest connection to the growing block."""
    adj, nw = g.adj, g.weights
    labels = [k - 1] * g.n
    assigned = [False] * g.n
    pool = list(range(g.n))
    rng.shuffle(pool)
    remaining = g.total_node_weight
    for b in range(k - 1):
        target = -(-remaining // (k - b))
        weight = 0
        skipped: set[int] = set()
        conn: dict[int, int] = {}
        frontier: list = []
        queue: deque[int] = deque()
        while weight < target:
            v = -1
            if greedy:
                while frontier:
                    negc, _, u = heapq.heappop(frontier)
                    if not assigned[u] and u not in skipped and conn.get(u) == -negc:
                        v = u
                        break
            else:
                while queue:
                    u = queue.popleft()
                    if not assigned[u] and u not in skipped:
                        v = u
                        break
            if v < 0:
                v = next((u for u in pool if not assigned[u] and u not in skipped), -1)
                if v < 0:
                    break
            if weight and weight + nw[v] > target:
                skipped.add(v)
                continue
            assigned[v] = True
            labels[v] = b
            weight += nw[v]
            for u, w in adj[v]:
                if assigned[u]:
                    continue
                if greedy:
                    c = conn.get(u, 0) + w
                    conn[u] = c
                    heapq.heappush(frontier, (-c, rng.random(), u))
                else:
                    queue.append(u)
        remaining -= weight
    return labels


def _bfs_grow(g: Graph, k: int, lmax: int, rng) -> list[int]:
    return _grow(g, k, rng, greedy=False)


def _greedy_grow(g: Graph, k: int, lmax: int, rng) -> list[int]:
    return _grow(g, k, rng, greedy=True)


PORTFOLIO: tuple[Callable, ...] = (_random_assign, _bfs_grow, _greedy_grow)


def rebalance(g: Graph, labels: list[int], bw: list[int], lmax: int) -> None:
    """Move nodes out of overweight blocks, in place, each time picking the
    move that increases the cut the least. Raises :class:`InfeasibleError`
    when no node of an overweight block fits anywhere else."""
    adj, nw = g.adj, g.weights
    k = len(bw)
    while True:
        over = max(range(k), key=bw.__getitem__)
        if bw[over] <= lmax:
            return
        best = None
        for v in range(g.n):
            if labels[v] != over:
                continue
            wv = nw[v]
            conn: dict[int, int] = {}
            for u, w in adj[v]:
                conn[labels[u]] = conn.get(labels[u], 0) + w
            own = conn.get(over, 0)
            for t in range(k):
                if t == over or bw[t] + wv > lmax:
                    continue
                key = (own - conn.get(t, 0), bw[t], v)
                if best is None or key < best[0]:
                    best = (key, v, t)
        if best is None:
            raise InfeasibleError(f"cannot rebalance: block {over} weighs {bw[over]} > {lmax}")
        _, v, t = best
        labels[v] = t
        bw[over] -= nw[v]
        bw[t] += nw[v]


def initial_partition(g: Graph, cfg: PartitionConfig, seed: int | None = None) -> Partition:
    """Best balanced partition among ``init_attempts`` runs of each portfolio
    member (random assignment, BFS growing, greedy growing), each repaired
    by :func:`rebalance`."""
    lmax = cfg.lmax(g)
    k = cfg.k
    if g.n and int(g.node_weight.max()) > lmax:
        raise InfeasibleError(f"node weight {int(g.node_weight.max())} exceeds L_max={lmax}")
    if k == 1 or g.n == 0:
        return Partition.from_assignment(g, np.zeros(g.n, dtype=np.int64), k, cfg.eps)
    rng = make_rng(cfg.seed if seed is None else seed)
    best_labels, best_cut = None, None
    for _ in range(cfg.init_attempts):
        for method in PORTFOLIO:
            labels = method(g, k, lmax, rng)
            bw = [0] * k
            for v, b in enumerate(labels):
                bw[b] += g.weights[v]
            try:
                rebalance(g, labels, bw, lmax)
            except InfeasibleError:
                continue
            c = cut_value(g, labels)
            if best_cut is None or c < best_cut:
                best_labels, best_cut = labels, c
    if best_labels is None:
        raise InfeasibleError(f"no balanced {k}-partition found (L_max={lmax})")
    return Partition.from_assignment(g, best_labels, k, cfg.eps)


# --------------------------------------------------------------------------
# k-way FM


def _fm_pass(g: Graph, labels: list[int], bw: list[int], lmax: int, rng, on_move=None) -> int:
    adj, nw = g.adj, g.weights
    n = g.n
    slack = max(nw) if nw else 0
    over = sum(1 for b in bw if b > lmax)

    def best_move(v: int, balanced: bool):
        own = labels[v]
        wv = nw[v]
        if balanced:
            cap = lmax + slack
        elif bw[own] > lmax:
            cap = lmax
        else:
            return None
        conn: dict[int, int] = {}
        for u, w in adj[v]:
            lu = labels[u]
            conn[lu] = conn.get(lu, 0) + w
        best_t, best_c = -1, -1
        for t, c in conn.items():
            if t == own or bw[t] + wv > cap:
                continue
            if c > best_c or (c == best_c and bw[t] < bw[best_t]):
                best_t, best_c = t, c
        if best_t < 0:
            return None
        return best_c - conn.get(own, 0), best_t

    heap: list = []
    for v in range(n):
        lv = labels[v]
        if any(labels[u] != lv for u, _ in adj[v]):
            mv = best_move(v, over == 0)
            if mv is not None:
                heap.append((-mv[0], rng.random(), v))
    heapq.heapify(heap)

    moved: set[int] = set()
    log: list[tuple[int, int]] = []
    delta = best = 0
    best_len = 0
    limit = min(n, max(25, n // 10))
    since_best = 0
    deferred: list[int] = []
    while heap:
        neg, _, v = heapq.heappop(heap)
        if v in moved:
            continue
        mv = best_move(v, over == 0)
        if mv is None:
            deferred.append(v)
            continue
        gain, t = mv
        if gain < -neg:
            heapq.heappush(heap, (-gain, rng.random(), v))
            continue
        own = labels[v]
        wv = nw[v]
        was_over_own, was_over_t = bw[own] > lmax, bw[t] > lmax
        labels[v] = t
        bw[own] -= wv
        bw[t] += wv
        over += (bw[own] > lmax) - was_over_own + (bw[t] > lmax) - was_over_t
        moved.add(v)
        log.append((v, own))
        delta -= gain
        if on_move is not None:
            on_move(v, own, t, bw)
        if over == 0 and delta < best:
            best, best_len, since_best = delta, len(log), 0
        else:
            since_best += 1
            if since_best > limit:
                break
        balanced = over == 0
        for u, _ in adj[v]:
            if u not in moved:
                mu = best_move(u, balanced)
                if mu is not None:
                    heapq.heappush(heap, (-mu[0], rng.random(), u))
        if deferred:
            still = []
            for u in deferred:
                if u in moved:
                    continue
                mu = best_move(u, balanced)
                if mu is None:
                    still.append(u)
                else:
                    heapq.heappush(heap, (-mu[0], rng.random(), u))
            deferred = still

    for v, own in reversed(log[best_len:]):
        t = labels[v]
        labels[v] = own
        bw[t] -= nw[v]
        bw[own] += nw[v]
    return -best


def fm_refine(
    g: Graph, p: Partition, cfg: PartitionConfig | None = None, seed: int = 0, *, on_move=None
) -> Partition:
    """k-way FM with move-once passes and rollback to the best balanced prefix.

    Within a pass a move may overload its target by at most one node weight;
    the next move must then come out of the overloaded block. Only balanced
    states are candidates for the rollback point, so the result is balanced
    and its cut is never above the input's.
    """
    if p.k == 1 or g.n == 0:
        return p.copy()
    passes = cfg.fm_passes if cfg is not None else 10
    labels = p.assignment.tolist()
    bw = p.block_weight.tolist()
    lmax = p.max_block_weight
    rng = make_rng(seed)
    for _ in range(passes):
        if _fm_pass(g, labels, bw, lmax, rng, on_move) <= 0:
            break
    return Partition(p.k, p.eps, np.asarray(labels, dtype=np.int64), np.asarray(bw, dtype=np.int64))


# --------------------------------------------------------------------------
# drivers


def refine(g: Graph, p: Partition, cfg: PartitionConfig, seed: int) -> Partition:
    s1, s2 = spawn(seed, 2)
    p = sclap_refine(g, p, cfg.rounds, s1, order=cfg.node_order)
    return fm_refine(g, p, cfg, s2)


def _check_feasible(g: Graph, cfg: PartitionConfig) -> None:
    lmax = cfg.lmax(g)
    if g.n and int(g.node_weight.max()) > lmax:
        raise InfeasibleError(
            f"node weight {int(g.node_weight.max())} exceeds L_max={lmax} for k={cfg.k}, eps={cfg.eps}"
        )


def uncoarsen(hier: Hierarchy, p: Partition, level: int, cfg: PartitionConfig, seed: int) -> Partition:
    """Refine ``p`` (defined on ``hier.levels[level]``) and carry it down to level 0."""
    seeds = spawn(seed, level + 1)
    p = refine(hier.levels[level], p, cfg, seeds[level])
    for lvl in range(level - 1, -1, -1):
        p = project_partition(p, hier.maps[lvl])
        p = refine(hier.levels[lvl], p, cfg, seeds[lvl])
    return p


def partition(g: Graph, cfg: PartitionConfig) -> Partition:
    """Multilevel k-way partition of ``g`` satisfying the balance constraint.

    If no balanced partition is found on the coarsest level (coarse node
    weights can make that a hard packing problem), initial partitioning is
    retried on successively finer levels.
    """
    _check_feasible(g, cfg)
    if cfg.k == 1 or g.n == 0:
        return Partition.from_assignment(g, np.zeros(g.n, dtype=np.int64), cfg.k, cfg.eps)
    s_coarsen, s_init, s_refine = spawn(cfg.seed, 3)
    hier = coarsen(g, _with_seed(cfg, s_coarsen))
    for level in range(len(hier) - 1, -1, -1):
        try:
            p = initial_partition(hier.levels[level], cfg, s_init)
        except InfeasibleError:
            if level == 0:
                raise
            continue
        return uncoarsen(hier, p, level, cfg, s_refine)
    raise AssertionError("unreachable")


def _with_seed(cfg: PartitionConfig, seed: int) -> PartitionConfig:
    return replace(cfg, seed=seed)


def combine(g: Graph, p1: Partition, p2: Partition, cfg: PartitionConfig) -> Partition:
    """Recombine two balanced partitions into one at least as good as both.

    Edges cut by either parent are never contracted: clusters only grow
    inside the regions of the parents' overlay, so both parents are exact
    partitions of every coarse level. The better parent is refined from the
    coarsest level down.
    """
    lmax = cfg.lmax(g)
    for name, p in (("p1", p1), ("p2", p2)):
        a = np.asarray(p.assignment)
        if a.shape != (g.n,):
            raise ValueError(f"{name} is not defined on this graph")
        if p.k != cfg.k or (g.n and (a.min() < 0 or a.max() >= cfg.k)):
            raise ValueError(f"{name} is not a {cfg.k}-partition")
        if Partition.from_assignment(g, a, cfg.k, cfg.eps).block_weight.max(initial=0) > lmax:
            raise ValueError(f"{name} violates the balance constraint (L_max={lmax})")
    overlay = p1.assignment * cfg.k + p2.assignment
    s_coarsen, s_refine = spawn(cfg.seed, 2)
    hier, _ = _coarsen(g, _with_seed(cfg, s_coarsen), region=overlay, stop=cfg.k)
    coarse_g = hier.coarsest
    # compose the fine->coarsest map; both parents are constant on its fibers
    to_coarse = np.arange(g.n)
    for cmap in hier.maps:
        to_coarse = cmap[to_coarse]
    candidates = []
    for p in (p1, p2):
        labels = np.zeros(coarse_g.n, dtype=np.int64)
        labels[to_coarse] = p.assignment
        candidates.append(Partition.from_assignment(coarse_g, labels, cfg.k, cfg.eps))
    start = min(candidates, key=lambda q: cut_value(coarse_g, q))
    return uncoarsen(hier, start, len(hier) - 1, cfg, s_refine)
