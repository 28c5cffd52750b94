"""Generic 0/1 integer linear programming: model, simplex, search, LP text I/O."""

from .branch_and_bound import InfeasibleLpError, lp_relax_solve, solve
from .lp_format import export_lp_text, parse_lp_text
from .model import (
    EQ,
    GE,
    LE,
    MAXIMIZE,
    MINIMIZE,
    STATUS_FEASIBLE,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT,
    IpInstance,
    LinearConstraint,
    SolveResult,
    constraint_violations,
    objective_value,
)

__all__ = [
    "EQ",
    "GE",
    "LE",
    "MAXIMIZE",
    "MINIMIZE",
    "STATUS_FEASIBLE",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_TIMEOUT",
    "IpInstance",
    "LinearConstraint",
    "SolveResult",
    "InfeasibleLpError",
    "constraint_violations",
    "objective_value",
    "lp_relax_solve",
    "solve",
    "export_lp_text",
    "parse_lp_text",
]
