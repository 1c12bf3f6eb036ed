"""Maximum edge-weight k-plex partitioning by variable neighborhood search."""

from ._backend import BACKEND, available as available_backends
from .graph import (
    GraphParseError,
    WeightedGraph,
    apply_dimacs_weights,
    density,
    dimacs_weight,
    load_graph,
    parse_dimacs,
    parse_weighted_edge_list,
)
from .objective import ObjectiveValue, Ordering, compare, evaluate, evaluate_move
from .oracle import Certificate, ExactResult, InstanceTooLarge, exact_solve, verify_partition
from .solution import (
    NEW,
    DegreeLedger,
    PartitionFormatError,
    Solution,
    format_partition,
    is_feasible,
    move_vertex,
    parse_partition,
    partition_weight,
    random_initial,
    read_partition,
    recompute_ledger,
    undo_move,
)
from .vns import RunReport, RunResult, SolverConfig, gap, solve, solve_repeated

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "NEW", "Certificate", "DegreeLedger", "ExactResult", "GraphParseError",
    "InstanceTooLarge", "ObjectiveValue", "Ordering", "PartitionFormatError", "RunReport",
    "RunResult", "Solution", "SolverConfig", "WeightedGraph", "apply_dimacs_weights",
    "available_backends", "compare", "density", "dimacs_weight", "evaluate", "evaluate_move",
    "exact_solve", "format_partition", "gap", "is_feasible", "load_graph", "move_vertex",
    "parse_dimacs", "parse_partition", "parse_weighted_edge_list", "partition_weight",
    "random_initial", "read_partition", "recompute_ledger", "solve", "solve_repeated",
    "undo_move", "verify_partition",
]
