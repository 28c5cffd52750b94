"""Generic 0/1 integer linear program representation."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidInstanceError

LE = "<="
EQ = "="
GE = ">="
RELATIONS = (LE, EQ, GE)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE = "feasible-incumbent"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIMEOUT = "timeout-no-incumbent"


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[int, float], ...]
    relation: str
    rhs: float

    def __post_init__(self) -> None:
        if not self.terms:
            raise InvalidInstanceError("constraint needs at least one term")
        if self.relation not in RELATIONS:
            raise InvalidInstanceError(f"unknown relation {self.relation!r}")
        indices = [i for i, _ in self.terms]
        if len(set(indices)) != len(indices):
            raise InvalidInstanceError("duplicate variable index in constraint")


@dataclass(frozen=True)
class IpInstance:
    """A linear program over binary variables x_j in {0, 1}."""

    num_vars: int
    objective: tuple[tuple[int, float], ...]
    sense: str
    constraints: tuple[LinearConstraint, ...]
    var_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise InvalidInstanceError("num_vars must be >= 0")
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise InvalidInstanceError(f"unknown sense {self.sense!r}")
        obj_indices = [i for i, _ in self.objective]
        if len(set(obj_indices)) != len(obj_indices):
            raise InvalidInstanceError("duplicate variable index in objective")
        for idx in obj_indices:
            if not 0 <= idx < self.num_vars:
                raise InvalidInstanceError(f"objective references variable {idx}")
        for row, con in enumerate(self.constraints):
            for idx, _ in con.terms:
                if not 0 <= idx < self.num_vars:
                    raise InvalidInstanceError(f"row {row} references variable {idx}")
        if self.var_names is not None and len(self.var_names) != self.num_vars:
            raise InvalidInstanceError("var_names length must equal num_vars")

    def name_of(self, idx: int) -> str:
        if self.var_names is not None:
            return self.var_names[idx]
        return f"x{idx}"

    @property
    def size_summary(self) -> str:
        return f"{self.num_vars} vars, {len(self.constraints)} rows"


@dataclass(frozen=True)
class SolveResult:
    status: str
    values: tuple[int, ...] | None
    objective_value: float | None
    nodes_explored: int
    wall_time: float
    timed_out: bool = False

    @property
    def has_solution(self) -> bool:
        return self.status in (STATUS_OPTIMAL, STATUS_FEASIBLE)

    def summary_line(self) -> str:
        obj = "-" if self.objective_value is None else f"{self.objective_value:.6g}"
        return (
            f"status={self.status} objective={obj} "
            f"nodes={self.nodes_explored} time={self.wall_time:.3f}s"
        )


def constraint_violations(
    ip: IpInstance, values: tuple[int, ...] | list[int], tol: float = 1e-9
) -> list[int]:
    """Indices of constraints violated by a 0/1 vector.

    Integer coefficient data is checked in exact integer arithmetic; anything
    else falls back to a tolerance comparison.
    """
    bad = []
    for row, con in enumerate(ip.constraints):
        exact = all(float(c).is_integer() for _, c in con.terms) and float(
            con.rhs
        ).is_integer()
        if exact:
            lhs: float = sum(int(c) * values[i] for i, c in con.terms)
            rhs: float = int(con.rhs)
            ok = (
                lhs <= rhs
                if con.relation == LE
                else lhs >= rhs
                if con.relation == GE
                else lhs == rhs
            )
        else:
            lhs = sum(c * values[i] for i, c in con.terms)
            rhs = con.rhs
            ok = (
                lhs <= rhs + tol
                if con.relation == LE
                else lhs >= rhs - tol
                if con.relation == GE
                else abs(lhs - rhs) <= tol
            )
        if not ok:
            bad.append(row)
    return bad


def objective_value(ip: IpInstance, values: tuple[int, ...] | list[int]) -> float:
    return float(sum(c * values[i] for i, c in ip.objective))
