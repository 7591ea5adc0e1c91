"""Communication-free Barabási-Albert generation.

The model is expressed through an edge array ``E`` in which positions ``2j``
and ``2j+1`` hold the endpoints of edge ``j``. New node ``n0 + t`` emits ``d``
edges whose sources are itself and whose targets copy a uniformly chosen
earlier array entry, which realizes preferential attachment. Instead of
storing ``E``, any entry is recomputed on demand: an even generated position
is known in closed form, an odd one points at a hash-chosen smaller position,
and the chain is followed until it lands on a known value. Edge ``i`` is thus
a pure function of ``i`` and the parameters, and any range of edges can be
produced independently.

An optional explicit seed edge list occupies the first ``2 * len(seed)``
positions of ``E``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer on Python ints."""
    z = (z + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def hash_position(hash_seed: int, pos: int, attempt: int = 0) -> int:
    return mix64((mix64((hash_seed & MASK) ^ mix64(pos)) + attempt) & MASK)


def _hash_position_np(hash_seed: int, pos: np.ndarray, attempt: np.ndarray) -> np.ndarray:
    key = np.uint64(hash_seed & MASK)
    with np.errstate(over="ignore"):
        return _mix64_np(_mix64_np(key ^ _mix64_np(pos)) + attempt)


def uniform_below(hash_seed: int, pos: int, bound: int) -> int:
    """Unbiased value in ``0..bound-1`` derived from ``(hash_seed, pos)`` by
    rejection sampling over successive attempts."""
    limit = (1 << 64) - (1 << 64) % bound
    attempt = 0
    while True:
        r = hash_position(hash_seed, pos, attempt)
        if r < limit:
            return r % bound
        attempt += 1


@dataclass(frozen=True)
class BaParams:
    n: int
    d: int
    n0: int = 0
    hash_seed: int = 0
    seed_edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n0 < 0 or self.n < self.n0:
            raise ValueError("need 0 <= n0 <= n")
        for u, v in self.seed_edges:
            if not (0 <= u < self.n0 and 0 <= v < self.n0):
                raise ValueError("seed edges must join seed nodes 0..n0-1")

    @property
    def num_edges(self) -> int:
        return self.d * (self.n - self.n0)

    @property
    def prefix(self) -> int:
        """Number of edge-array positions taken by the seed edges."""
        return 2 * len(self.seed_edges)


def _seed_value(params: BaParams, x: int) -> int:
    return params.seed_edges[x // 2][x % 2]


def ba_edge(i: int, params: BaParams) -> tuple[int, int]:
    if not 0 <= i < params.num_edges:
        raise IndexError(f"edge index {i} outside 0..{params.num_edges - 1}")
    s = params.prefix
    u = params.n0 + i // params.d
    p = s + 2 * i + 1
    for _ in range(2 * i + 2):
        x = uniform_below(params.hash_seed, p, p)
        if x < s:
            return u, _seed_value(params, x)
        if (x - s) % 2 == 0:
            return u, params.n0 + (x - s) // 2 // params.d
        p = x
    raise RuntimeError("edge chain exceeded its step bound")  # unreachable: p strictly decreases


def _resolve_chunk(params: BaParams, lo: int, hi: int) -> np.ndarray:
    s = params.prefix
    idx = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((hi - lo, 2), dtype=np.int64)
    out[:, 0] = params.n0 + idx // params.d
    pos = (s + 2 * idx + 1).astype(np.uint64)
    pending = np.arange(hi - lo)
    seed_arr = np.asarray(params.seed_edges, dtype=np.int64).reshape(-1)
    steps = 0
    while len(pending):
        steps += 1
        if steps > 2 * hi + 2:
            raise RuntimeError("edge chain exceeded its step bound")
        p = pos[pending]
        with np.errstate(over="ignore"):
            limit = np.uint64(0) - (np.uint64(0) - p) % p  # 2**64 - (2**64 mod p); 0 stands for 2**64
        attempt = np.zeros(len(pending), dtype=np.uint64)
        r = _hash_position_np(params.hash_seed, p, attempt)
        bad = (limit != 0) & (r >= limit)
        while bad.any():
            attempt[bad] += np.uint64(1)
            r[bad] = _hash_position_np(params.hash_seed, p[bad], attempt[bad])
            bad = (limit != 0) & (r >= limit)
        x = (r % p).astype(np.int64)
        in_seed = x < s
        even = ~in_seed & ((x - s) % 2 == 0)
        out[pending[in_seed], 1] = seed_arr[x[in_seed]]
        out[pending[even], 1] = params.n0 + (x[even] - s) // 2 // params.d
        cont = ~(in_seed | even)
        pos[pending[cont]] = x[cont].astype(np.uint64)
        pending = pending[cont]
    return out


def ba_generate(params: BaParams, lo: int = 0, hi: int | None = None, *, workers: int = 1, chunk: int = 1 << 16) -> np.ndarray:
    """Edges ``lo..hi-1`` as an ``(hi-lo, 2)`` array. The result does not
    depend on ``workers`` or ``chunk``."""
    hi = params.num_edges if hi is None else hi
    if not 0 <= lo <= hi <= params.num_edges:
        raise ValueError(f"invalid edge range {lo}:{hi} for {params.num_edges} edges")
    bounds = list(range(lo, hi, chunk)) + [hi]
    spans = list(zip(bounds[:-1], bounds[1:]))
    if not spans:
        return np.empty((0, 2), dtype=np.int64)
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda s: _resolve_chunk(params, *s), spans))
    else:
        parts = [_resolve_chunk(params, a, b) for a, b in spans]
    return np.concatenate(parts)


def simplify(n: int, edges: np.ndarray) -> Graph:
    """Drop self-loops and duplicate edges; all weights become one."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = e[e[:, 0] != e[:, 1]]
    e = np.unique(np.sort(e, axis=1), axis=0)
    return Graph.from_edges(n, e)


def degree_ccdf_slope(degrees: np.ndarray, lo: int = 16, hi: int = 256) -> float:
    """Least-squares slope of log10 P(deg >= x) against log10 x over the
    integer degrees ``lo..hi`` that occur with a non-zero tail."""
    deg = np.sort(np.asarray(degrees))
    xs = np.arange(lo, hi + 1)
    tail = (len(deg) - np.searchsorted(deg, xs, side="left")) / len(deg)
    keep = tail > 0
    if keep.sum() < 2:
        raise ValueError("degree tail too short to fit")
    slope, _ = np.polyfit(np.log10(xs[keep]), np.log10(tail[keep]), 1)
    return float(slope)
