"""Command-line front end.

Every subcommand prints ``key=value`` lines on stdout and writes its solution
to ``--output`` when given. Exit status is 1 for invalid input and 2 for
infeasible instances.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .bagen import BaParams, ba_generate, simplify
from .errors import GraphFormatError, InfeasibleError
from .graph import Graph, Partition, cut_value, max_block_weight
from .io import format_metis, load_metis, read_labels, write_labels
from .mapping import HierarchySpec, ProcessMapping, comm_cost, top_down_map
from .multilevel import PartitionConfig, partition
from .separator import SEP, V1, V2, Separator, multilevel_separator
from .spac import EdgePartition, edge_partition, eval_edge_partition

EXIT_INVALID = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # invalid flags are invalid input
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- reports


def _emit(pairs: dict) -> None:
    for key, val in pairs.items():
        if isinstance(val, float):
            val = repr(val)
        elif isinstance(val, bool):
            val = str(val).lower()
        print(f"{key}={val}")


def partition_report(g: Graph, p: Partition) -> dict:
    lmax = p.max_block_weight
    heaviest = int(p.block_weight.max(initial=0))
    avg = -(-g.total_node_weight // p.k)
    return {
        "n": g.n, "m": g.m, "k": p.k, "eps": float(p.eps),
        "cut": cut_value(g, p),
        "max_block_weight": heaviest, "lmax": lmax,
        "balanced": heaviest <= lmax,
        "imbalance": heaviest / avg - 1 if avg else 0.0,
    }


def separator_report(g: Graph, sep: Separator, eps: float) -> dict:
    return {
        "n": g.n, "m": g.m, "eps": float(eps),
        "separator_weight": int(sep.weights[SEP]),
        "separator_nodes": int((sep.assignment == SEP).sum()),
        "v1_weight": int(sep.weights[V1]), "v2_weight": int(sep.weights[V2]),
        "lmax": max_block_weight(g.total_node_weight, 2, eps),
        "valid": sep.is_valid(g), "balanced": sep.is_balanced(g, eps),
    }


def edge_partition_report(g: Graph, ep: EdgePartition, eps: float) -> dict:
    rf, biggest = eval_edge_partition(g, ep)
    return {
        "n": g.n, "m": g.m, "k": ep.k, "eps": float(eps),
        "replication_factor": rf, "max_block_edges": biggest,
    }


def mapping_report(g: Graph, mp: ProcessMapping, spec: HierarchySpec) -> dict:
    return {
        "n": g.n, "m": g.m, "hierarchy": ":".join(map(str, spec.factors)),
        "cost": comm_cost(g, mp, spec),
        "bijection": mp.is_bijection(spec.num_pes),
    }


# ---------------------------------------------------------------- commands


def _write(values, path: str | None) -> None:
    if path:
        write_labels(values, path)


def _config(args, k: int) -> PartitionConfig:
    return PartitionConfig(k=k, eps=args.eps, seed=args.seed)


def cmd_partition(args) -> int:
    g = load_metis(args.graph)
    p = partition(g, _config(args, args.k))
    _write(p.assignment, args.output)
    _emit(partition_report(g, p))
    return 0


def cmd_separator(args) -> int:
    g = load_metis(args.graph)
    sep = multilevel_separator(g, args.eps, _config(args, 2))
    _write(sep.assignment, args.output)
    _emit(separator_report(g, sep, args.eps))
    return 0


def cmd_edgepartition(args) -> int:
    g = load_metis(args.graph)
    ep = edge_partition(g, args.k, args.eps, _config(args, args.k))
    _write(ep.edge_assignment, args.output)
    report = edge_partition_report(g, ep, args.eps)
    report["dominant_cut"] = ep.dominant_cut
    _emit(report)
    return 0


def cmd_map(args) -> int:
    g = load_metis(args.graph)
    spec = HierarchySpec.parse(args.hierarchy)
    mp = top_down_map(g, spec, PartitionConfig(seed=args.seed))
    _write(mp.sigma, args.output)
    _emit(mapping_report(g, mp, spec))
    return 0


def _parse_range(text: str | None, total: int) -> tuple[int, int]:
    if text is None:
        return 0, total
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"--range: expected lo:hi, got {text!r}") from None
    if not 0 <= lo <= hi <= total:
        raise UsageError(f"--range: {lo}:{hi} outside 0:{total}")
    return lo, hi


def cmd_generate(args) -> int:
    try:
        params = BaParams(n=args.n, d=args.d, n0=args.n0, hash_seed=args.seed)
    except ValueError as exc:
        raise UsageError(f"generate: {exc}") from None
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    lo, hi = _parse_range(args.range, params.num_edges)
    edges = ba_generate(params, lo, hi, workers=args.workers)
    if args.simplify:
        text = format_metis(simplify(params.n, edges))
    else:
        text = "".join(f"{u} {v}\n" for u, v in edges.tolist())
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    g = load_metis(args.graph)
    kind = args.kind
    if kind == "partition":
        if args.k is None:
            raise UsageError("evaluate partition: --k is required")
        a = read_labels(args.solution, g.n, args.k, "block id")
        _emit(partition_report(g, Partition.from_assignment(g, a, args.k, args.eps)))
    elif kind == "separator":
        a = read_labels(args.solution, g.n, 3, "separator label")
        _emit(separator_report(g, Separator.from_labels(g, a), args.eps))
    elif kind == "edgepartition":
        if args.k is None:
            raise UsageError("evaluate edgepartition: --k is required")
        a = read_labels(args.solution, g.m, args.k, "block id")
        ep = EdgePartition(args.k, a, np.bincount(a, minlength=args.k))
        _emit(edge_partition_report(g, ep, args.eps))
    else:
        if args.hierarchy is None:
            raise UsageError("evaluate mapping: --hierarchy is required")
        spec = HierarchySpec.parse(args.hierarchy)
        a = read_labels(args.solution, g.n, spec.num_pes, "PE id")
        _emit(mapping_report(g, ProcessMapping(a), spec))
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlgraph", description="Multilevel graph partitioning toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, k: bool = True, eps: float = 0.03):
        p.add_argument("graph", help="input graph in METIS format")
        if k:
            p.add_argument("--k", type=int, required=True, help="number of blocks")
        p.add_argument("--eps", type=float, default=eps, help="allowed imbalance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", "-o", help="solution file")

    common(sub.add_parser("partition", help="k-way node partition"))
    common(sub.add_parser("separator", help="balanced node separator"), k=False, eps=0.2)
    common(sub.add_parser("edgepartition", help="edge partition via split-and-connect"))
    mp = sub.add_parser("map", help="map tasks onto a machine hierarchy")
    mp.add_argument("graph")
    mp.add_argument("--hierarchy", required=True, help="a1:a2:...:ak, a1 innermost")
    mp.add_argument("--seed", type=int, default=0)
    mp.add_argument("--output", "-o")

    gen = sub.add_parser("generate", help="Barabási-Albert edge list")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--n0", type=int, default=0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--range", help="edge index range lo:hi")
    gen.add_argument("--simplify", action="store_true", help="drop loops and duplicates, write METIS")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--output", "-o")

    ev = sub.add_parser("evaluate", help="score a solution file")
    ev.add_argument("graph")
    ev.add_argument("solution")
    ev.add_argument("--kind", choices=("partition", "separator", "edgepartition", "mapping"), default="partition")
    ev.add_argument("--k", type=int)
    ev.add_argument("--eps", type=float, default=0.03)
    ev.add_argument("--hierarchy")
    return parser


COMMANDS = {
    "partition": cmd_partition,
    "separator": cmd_separator,
    "edgepartition": cmd_edgepartition,
    "map": cmd_map,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
