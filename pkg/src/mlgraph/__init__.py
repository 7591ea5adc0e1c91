"""Multilevel graph algorithms: partitioning, node separators, edge
partitioning, process mapping and a communication-free Barabási-Albert
generator."""

from .errors import GraphFormatError, InfeasibleError
from .graph import (
    Clustering,
    Graph,
    Hierarchy,
    Partition,
    contract,
    cut_value,
    max_block_weight,
    project_partition,
)
from .io import load_metis, parse_metis, write_metis
from .multilevel import PartitionConfig, coarsen, combine, fm_refine, initial_partition, partition
from .sclap import sclap_cluster, sclap_refine
from .separator import (
    FlowNetwork,
    Separator,
    build_flow_problem,
    derive_separator,
    flow_refine,
    fm_separator_refine,
    multilevel_separator,
    node_capacitated_maxflow,
)
from .spac import EdgePartition, SpacMapping, build_spac, edge_partition, eval_edge_partition
from .mapping import HierarchySpec, ProcessMapping, comm_cost, top_down_map
from .bagen import BaParams, ba_edge, ba_generate

__version__ = "0.1.0"

__all__ = [
    "BaParams", "Clustering", "EdgePartition", "FlowNetwork", "Graph", "GraphFormatError",
    "Hierarchy", "HierarchySpec", "InfeasibleError", "Partition", "PartitionConfig",
    "ProcessMapping", "Separator", "SpacMapping", "ba_edge", "ba_generate", "build_flow_problem",
    "build_spac", "coarsen", "combine", "comm_cost", "contract", "cut_value", "derive_separator",
    "edge_partition", "eval_edge_partition", "flow_refine", "fm_refine", "fm_separator_refine",
    "initial_partition", "load_metis", "max_block_weight", "multilevel_separator",
    "node_capacitated_maxflow", "parse_metis", "partition", "project_partition", "sclap_cluster",
    "sclap_refine", "top_down_map", "write_metis",
]
