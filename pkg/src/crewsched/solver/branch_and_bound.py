"""Branch-and-bound search for 0/1 programs over LP relaxations.

Node order is best-bound first, with depth-first plunging until the first
incumbent appears (quick feasible schedules matter more than tight gaps
early on). Branching picks the most fractional variable, ties broken by
lowest index, so the search is fully deterministic for a fixed instance.
"""

from __future__ import annotations

import heapq
import time

import numpy as np

from ..errors import CrewSchedError
from .model import (
    STATUS_FEASIBLE,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT,
    IpInstance,
    SolveResult,
    constraint_violations,
)
from .simplex import (
    LP_INFEASIBLE,
    LP_OPTIMAL,
    LP_TIMEOUT,
    LP_UNBOUNDED,
    prepare,
    solve_lp,
)

INTEGRALITY_TOL = 1e-6
OBJECTIVE_TOL = 1e-9


class InfeasibleLpError(CrewSchedError):
    """The continuous relaxation has no feasible point."""


class _Deadline(Exception):
    pass


def lp_relax_solve(ip: IpInstance) -> tuple[float, np.ndarray]:
    """Optimal value and point of the continuous relaxation over the 0/1 box."""
    prep = prepare(ip)
    res = solve_lp(prep, np.zeros(ip.num_vars), np.ones(ip.num_vars))
    if res.status == LP_INFEASIBLE:
        raise InfeasibleLpError("relaxation is infeasible")
    if res.status != LP_OPTIMAL:
        raise CrewSchedError(f"relaxation ended with status {res.status}")
    return prep.flip_sign * res.value, res.x


def solve(
    ip: IpInstance,
    time_limit: float | None = None,
    cancel=None,
) -> SolveResult:
    """Solve a 0/1 program to optimality, or return the best incumbent at the
    deadline. Statuses: optimal, feasible-incumbent, infeasible,
    timeout-no-incumbent."""
    if time_limit is not None and time_limit <= 0:
        raise ValueError("time_limit must be positive")
    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit

    if ip.num_vars == 0:
        return SolveResult(STATUS_OPTIMAL, (), 0.0, 0, time.monotonic() - start)

    search = _Search(ip, deadline, cancel)
    try:
        search.run()
        timed_out = False
    except _Deadline:
        timed_out = True

    elapsed = time.monotonic() - start
    if search.incumbent is not None:
        status = STATUS_FEASIBLE if timed_out else STATUS_OPTIMAL
        return SolveResult(
            status,
            search.incumbent,
            search.incumbent_objective * search.prep.flip_sign,
            search.nodes,
            elapsed,
            timed_out=timed_out,
        )
    if timed_out:
        return SolveResult(STATUS_TIMEOUT, None, None, search.nodes, elapsed, timed_out=True)
    return SolveResult(STATUS_INFEASIBLE, None, None, search.nodes, elapsed)


class _Search:
    def __init__(self, ip: IpInstance, deadline, cancel):
        self.ip = ip
        self.prep = prepare(ip)
        self.deadline = deadline
        self.cancel = cancel
        self.incumbent: tuple[int, ...] | None = None
        self.incumbent_objective = -np.inf  # internal maximize sense
        self.nodes = 0
        self._seq = 0

    def run(self) -> None:
        n = self.ip.num_vars
        plunge_stack: list[tuple[float, tuple[tuple[int, int], ...]]] = [(np.inf, ())]
        frontier: list[tuple[float, int, tuple[tuple[int, int], ...]]] = []

        while plunge_stack or frontier:
            self._check_deadline()
            if self.incumbent is None and plunge_stack:
                parent_bound, fixes = plunge_stack.pop()
            elif plunge_stack:
                # First incumbent found: move pending plunge nodes to the frontier.
                for parent_bound, fixes in plunge_stack:
                    self._push(frontier, parent_bound, fixes)
                plunge_stack = []
                continue
            else:
                neg_bound, _, fixes = heapq.heappop(frontier)
                parent_bound = -neg_bound
            if parent_bound <= self.incumbent_objective + OBJECTIVE_TOL:
                continue

            outcome = self._evaluate(fixes)
            if outcome is None:
                continue
            bound, plunge_child, other_child = outcome
            if self.incumbent is None:
                plunge_stack.append((bound, other_child))
                plunge_stack.append((bound, plunge_child))
            else:
                self._push(frontier, bound, other_child)
                self._push(frontier, bound, plunge_child)

    def _push(self, frontier, bound, fixes) -> None:
        if bound <= self.incumbent_objective + OBJECTIVE_TOL:
            return
        self._seq += 1
        heapq.heappush(frontier, (-bound, self._seq, fixes))

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Deadline
        if self.cancel is not None and self.cancel.is_set():
            raise _Deadline

    def _evaluate(self, fixes):
        """Solve one node's relaxation. Returns None when pruned, else
        (bound, plunge_child_fixes, other_child_fixes)."""
        n = self.ip.num_vars
        lb = np.zeros(n)
        ub = np.ones(n)
        for var, value in fixes:
            lb[var] = ub[var] = float(value)

        self.nodes += 1
        res = solve_lp(self.prep, lb, ub, self.deadline, self.cancel)
        if res.status == LP_TIMEOUT:
            raise _Deadline
        if res.status == LP_INFEASIBLE:
            return None
        if res.status == LP_UNBOUNDED:
            raise CrewSchedError("relaxation unbounded despite 0/1 box")
        bound = res.value
        if bound <= self.incumbent_objective + OBJECTIVE_TOL:
            return None

        x = res.x
        frac = np.abs(x - np.round(x))
        if float(frac.max(initial=0.0)) <= INTEGRALITY_TOL:
            values = tuple(int(v) for v in np.round(x))
            violated = constraint_violations(self.ip, values)
            if not violated:
                objective = float(self.prep.c @ np.array(values, dtype=float))
                if objective > self.incumbent_objective:
                    self.incumbent = values
                    self.incumbent_objective = objective
                return None
            branch = self._violated_branch_var(violated, fixes)
            if branch is None:
                return None
            x_branch = 0.5
        else:
            branch = int(np.argmin(np.where(frac > INTEGRALITY_TOL, np.abs(x - 0.5), np.inf)))
            x_branch = float(x[branch])

        plunge_value = 1 if x_branch >= 0.5 else 0
        plunge_child = fixes + ((branch, plunge_value),)
        other_child = fixes + ((branch, 1 - plunge_value),)
        return bound, plunge_child, other_child

    def _violated_branch_var(self, violated_rows, fixes):
        """Rounded LP point failed an exact re-check; branch on an unfixed
        variable from a violated row to split the numeric ambiguity."""
        fixed = {var for var, _ in fixes}
        for row in violated_rows:
            for var, _ in self.ip.constraints[row].terms:
                if var not in fixed:
                    return var
        return None
