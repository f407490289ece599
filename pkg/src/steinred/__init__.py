"""Prize-collecting Steiner tree reductions and exact solving."""

from .bnb import BnbStats, SolveResult, branch_and_bound, exact_solve
from .model import (
    EPS,
    INF,
    InfeasibleError,
    PcInstance,
    SteinerTree,
    ValidationError,
    evaluate_cost,
    validate_tree,
)
from .reduce import ReduceResult, reduce_loop
from .stpio import ParseError, parse_stp, write_solution, write_stp

__version__ = "0.1.0"

__all__ = [
    "BnbStats",
    "EPS",
    "INF",
    "InfeasibleError",
    "ParseError",
    "PcInstance",
    "ReduceResult",
    "SolveResult",
    "SteinerTree",
    "ValidationError",
    "branch_and_bound",
    "evaluate_cost",
    "exact_solve",
    "parse_stp",
    "reduce_loop",
    "validate_tree",
    "write_solution",
    "write_stp",
    "__version__",
]
