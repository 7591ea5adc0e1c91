"""METIS graph files and the one-value-per-line solution files."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import GraphFormatError
from .graph import AsymmetricAdjacencyError, Graph

logger = logging.getLogger(__name__)


def parse_metis(text: str, path: str | None = None) -> Graph:
    """Parse METIS text. Line numbers in errors are 1-based file lines."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    body = [(i + 1, ln) for i, ln in enumerate(lines) if not ln.lstrip().startswith("%")]
    if not body:
        raise GraphFormatError("empty file", path=path)

    header_line, header = body[0]
    tokens = header.split()
    if len(tokens) < 2 or len(tokens) > 4:
        raise GraphFormatError("header must be 'n m [fmt [ncon]]'", header_line, path)
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise GraphFormatError("non-integer n or m in header", header_line, path) from None
    if n < 0 or m < 0:
        raise GraphFormatError("negative n or m in header", header_line, path)
    fmt = tokens[2] if len(tokens) > 2 else "0"
    if not fmt.isdigit() or len(fmt) > 3 or fmt.strip("01"):
        raise GraphFormatError(f"unsupported format flag {fmt!r}", header_line, path)
    fmt = fmt.zfill(3)
    if fmt[0] == "1":
        raise GraphFormatError("node sizes (fmt 100) are not supported", header_line, path)
    has_nw, has_ew = fmt[1] == "1", fmt[2] == "1"
    if len(tokens) == 4 and tokens[3] != "1":
        raise GraphFormatError("multi-constraint node weights are not supported", header_line, path)

    node_lines = body[1:]
    # trailing blank lines after the n node lines are tolerated
    while len(node_lines) > n and not node_lines[-1][1].strip():
        node_lines.pop()
    if len(node_lines) != n:
        where = node_lines[n][0] if len(node_lines) > n else (body[-1][0] + 1)
        raise GraphFormatError(f"expected {n} node lines, found {len(node_lines)}", where, path)

    node_weight = np.ones(n, dtype=np.int64)
    src: list[int] = []
    dst: list[int] = []
    wts: list[int] = []
    for v, (lineno, ln) in enumerate(node_lines):
        try:
            vals = [int(t) for t in ln.split()]
        except ValueError:
            raise GraphFormatError("non-integer token", lineno, path) from None
        if has_nw:
            if not vals:
                raise GraphFormatError("missing node weight", lineno, path)
            if vals[0] < 1:
                raise GraphFormatError("node weight must be >= 1", lineno, path)
            node_weight[v] = vals[0]
            vals = vals[1:]
        if has_ew:
            if len(vals) % 2:
                raise GraphFormatError("odd number of neighbor/weight tokens", lineno, path)
            nbrs, ews = vals[0::2], vals[1::2]
        else:
            nbrs, ews = vals, [1] * len(vals)
        for u, w in zip(nbrs, ews):
            if not 1 <= u <= n:
                raise GraphFormatError(f"neighbor {u} out of range 1..{n}", lineno, path)
            if w < 1:
                raise GraphFormatError("edge weight must be >= 1", lineno, path)
            src.append(v)
            dst.append(u - 1)
            wts.append(w)

    try:
        g = Graph.from_arcs(n, src, dst, wts, node_weight)
    except AsymmetricAdjacencyError as exc:
        raise GraphFormatError(str(exc), node_lines[exc.u][0], path) from None
    except ValueError as exc:
        raise GraphFormatError(str(exc), path=path) from None
    if g.m != m:
        logger.warning("header announces %d edges, adjacency holds %d after merging", m, g.m)
    return g


def load_metis(path: str | Path) -> Graph:
    path = Path(path)
    return parse_metis(path.read_text(), str(path))


def format_metis(g: Graph) -> str:
    has_nw = bool((g.node_weight != 1).any())
    has_ew = bool((g.edge_weight != 1).any())
    header = f"{g.n} {g.m}"
    if has_nw or has_ew:
        header += f" {int(has_nw)}{int(has_ew)}" if has_nw else " 1"
    out = [header]
    t = (g.targets + 1).tolist()
    w = g.edge_weight.tolist()
    o = g.offsets.tolist()
    for v in range(g.n):
        parts: list[str] = [str(int(g.node_weight[v]))] if has_nw else []
        for i in range(o[v], o[v + 1]):
            parts.append(str(t[i]))
            if has_ew:
                parts.append(str(w[i]))
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def write_metis(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_metis(g))


def read_labels(path: str | Path, n: int, upper: int | None = None, what: str = "label") -> np.ndarray:
    """Read one non-negative integer per line; ``upper`` is an exclusive bound."""
    path = Path(path)
    lines = path.read_text().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != n:
        raise GraphFormatError(f"expected {n} lines, found {len(lines)}", min(len(lines), n) + 1, str(path))
    out = np.empty(n, dtype=np.int64)
    for i, ln in enumerate(lines):
        try:
            val = int(ln.strip())
        except ValueError:
            raise GraphFormatError(f"non-integer {what}", i + 1, str(path)) from None
        if val < 0 or (upper is not None and val >= upper):
            bound = f" 0..{upper - 1}" if upper is not None else ""
            raise GraphFormatError(f"{what} {val} out of range{bound}", i + 1, str(path))
        out[i] = val
    return out


def write_labels(values: Iterable[int], path: str | Path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in values))
