"""Bounded-variable two-phase revised simplex over dense arrays.

Solves max c.x subject to A x {<=,=,>=} b and lb <= x <= ub, which is the
continuous relaxation used by the branch-and-bound driver (structural bounds
are [0,1] unless a node has fixed a variable). Each row r gets a slack
variable whose bounds encode the relation; rows whose slack cannot absorb the
initial residual get a signed artificial driven out in phase one. The basis
inverse is kept explicitly and updated in place per pivot, with Bland's rule
as the anti-cycling fallback after a run of degenerate steps. Equality rows
are handled natively via zero-width slack bounds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import SolverCapacityError
from .model import EQ, GE, LE, MAXIMIZE, IpInstance

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_UNBOUNDED = "unbounded"
LP_TIMEOUT = "timeout"

# Pivoting and feasibility tolerances; integrality is judged by the caller.
_RCOST_TOL = 1e-9
_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-8
_DEGENERATE_STEP = 1e-12
_BLAND_TRIGGER = 60
_CHECK_INTERVAL = 128
_REFRESH_INTERVAL = 512

MEMORY_CAP_BYTES = 2_000_000_000


@dataclass
class LpResult:
    status: str
    value: float | None
    x: np.ndarray | None  # structural variable values
    iterations: int


@dataclass(frozen=True)
class PreparedLp:
    """Dense row/column data shared by every node solve of one instance."""

    a: np.ndarray  # (m, n) structural columns
    b: np.ndarray  # (m,)
    c: np.ndarray  # (n,) in maximize sense
    relations: tuple[str, ...]
    flip_sign: float  # -1.0 when the original sense was minimize

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]

    @property
    def num_cols(self) -> int:
        return self.a.shape[1]


def prepare(ip: IpInstance) -> PreparedLp:
    m, n = len(ip.constraints), ip.num_vars
    if m * m * 8 > MEMORY_CAP_BYTES:
        raise SolverCapacityError(
            f"dense basis for {m} rows exceeds the {MEMORY_CAP_BYTES >> 20} MiB cap"
        )
    a = np.zeros((m, n))
    b = np.zeros(m)
    for r, con in enumerate(ip.constraints):
        for j, coeff in con.terms:
            a[r, j] = coeff
        b[r] = con.rhs
    c = np.zeros(n)
    for j, coeff in ip.objective:
        c[j] = coeff
    flip = 1.0 if ip.sense == MAXIMIZE else -1.0
    return PreparedLp(
        a=a,
        b=b,
        c=c * flip,
        relations=tuple(con.relation for con in ip.constraints),
        flip_sign=flip,
    )


def solve_lp(
    prep: PreparedLp,
    lb: np.ndarray,
    ub: np.ndarray,
    deadline: float | None = None,
    cancel=None,
) -> LpResult:
    """Solve the relaxation with the given structural bounds.

    Returns values in the prepared (maximize) sense; callers undo flip_sign.
    """
    m, _ = prep.num_rows, prep.num_cols
    if m == 0:
        x = np.where(prep.c > 0, ub, lb).astype(float)
        return LpResult(LP_OPTIMAL, float(prep.c @ x), x, 0)
    return _Simplex(prep, lb, ub, deadline, cancel).run()


class _Simplex:
    def __init__(self, prep, lb, ub, deadline, cancel):
        self.prep = prep
        self.deadline = deadline
        self.cancel = cancel
        m, n = prep.num_rows, prep.num_cols
        self.m, self.n = m, n
        self.total = n + 2 * m  # structural | slacks | artificials
        self.lo = np.empty(self.total)
        self.hi = np.empty(self.total)
        self.lo[:n], self.hi[:n] = lb, ub
        for r, rel in enumerate(prep.relations):
            if rel == LE:
                self.lo[n + r], self.hi[n + r] = 0.0, np.inf
            elif rel == GE:
                self.lo[n + r], self.hi[n + r] = -np.inf, 0.0
            else:
                self.lo[n + r], self.hi[n + r] = 0.0, 0.0
        self.lo[n + m :] = 0.0
        self.hi[n + m :] = 0.0  # opened per-row only when a row needs an artificial
        self.art_sign = np.ones(m)
        self.val = np.zeros(self.total)
        self.iterations = 0

    def ftran(self, j: int) -> np.ndarray:
        n, m = self.n, self.m
        if j < n:
            return self.binv @ self.prep.a[:, j]
        if j < n + m:
            return self.binv[:, j - n].copy()
        return self.art_sign[j - n - m] * self.binv[:, j - n - m]

    # -- setup ----------------------------------------------------------------

    def _initial_basis(self) -> bool:
        """Start from the slack basis; returns True if phase one is needed."""
        n, m = self.n, self.m
        self.val[:n] = np.clip(0.0, self.lo[:n], self.hi[:n])
        residual = self.prep.b - self.prep.a @ self.val[:n]
        self.basis = np.empty(m, dtype=np.int64)
        self.in_basis = np.zeros(self.total, dtype=bool)
        xb = np.empty(m)
        needs_phase1 = False
        for r in range(m):
            s = n + r
            if self.lo[s] - _FEAS_TOL <= residual[r] <= self.hi[s] + _FEAS_TOL:
                self.basis[r] = s
                xb[r] = residual[r]
            else:
                # Slack pinned at its nearest bound; artificial absorbs the rest.
                pinned = float(np.clip(residual[r], self.lo[s], self.hi[s]))
                self.val[s] = pinned
                gap = residual[r] - pinned
                self.art_sign[r] = 1.0 if gap >= 0 else -1.0
                self.basis[r] = n + m + r
                self.hi[n + m + r] = np.inf
                xb[r] = abs(gap)
                needs_phase1 = True
        self.xb = xb
        self.in_basis[self.basis] = True
        self.binv = np.eye(m)
        for r in range(m):
            if self.basis[r] >= n + m:
                # Basis column is art_sign * e_r, so the inverse diagonal flips too.
                self.binv[r, r] = self.art_sign[r]
        return needs_phase1

    def _refresh_xb(self) -> None:
        n, m = self.n, self.m
        rhs = self.prep.b - self.prep.a @ np.where(self.in_basis[:n], 0.0, self.val[:n])
        for r in range(m):
            s = n + r
            if not self.in_basis[s]:
                rhs[r] -= self.val[s]
        self.xb = self.binv @ rhs

    # -- main loop ------------------------------------------------------------

    def run(self) -> LpResult:
        needs_phase1 = self._initial_basis()
        n, m = self.n, self.m

        if needs_phase1:
            cost1 = np.zeros(self.total)
            cost1[n + m :] = -1.0  # maximize -sum(artificials)
            status = self._optimize(cost1)
            if status != LP_OPTIMAL:
                return LpResult(status, None, None, self.iterations)
            art_rows = self.basis >= n + m
            art_total = float(self.xb[art_rows].sum()) if art_rows.any() else 0.0
            if art_total > _FEAS_TOL * max(1.0, float(np.abs(self.prep.b).sum())):
                return LpResult(LP_INFEASIBLE, None, None, self.iterations)
            self._expel_artificials()
            # Any artificial still basic sits at 0 in a redundant row; pin all.
            self.hi[n + m :] = 0.0

        cost2 = np.zeros(self.total)
        cost2[:n] = self.prep.c
        status = self._optimize(cost2)
        if status == LP_TIMEOUT:
            return LpResult(status, None, None, self.iterations)
        if status != LP_OPTIMAL:
            return LpResult(status, None, None, self.iterations)
        x = self._structural_values()
        return LpResult(LP_OPTIMAL, float(self.prep.c @ x), x, self.iterations)

    def _expel_artificials(self) -> None:
        """Pivot basic artificials (all at ~0) out where a real column can replace
        them; rows with no pivot candidate are redundant and keep their artificial."""
        n, m = self.n, self.m
        for r in range(m):
            if self.basis[r] < n + m:
                continue
            row = self.binv[r]
            cand = None
            alphas = row @ self.prep.a
            for j in range(n):
                if not self.in_basis[j] and self.lo[j] < self.hi[j] and abs(alphas[j]) > 1e-7:
                    cand = j
                    break
            if cand is None:
                for rr in range(m):
                    s = n + rr
                    if not self.in_basis[s] and self.lo[s] < self.hi[s] and abs(row[rr]) > 1e-7:
                        cand = s
                        break
            if cand is None:
                continue
            w = self.ftran(cand)
            leaving = self.basis[r]
            self.val[leaving] = 0.0
            self._pivot(cand, r, w, enter_value=self.val[cand])

    def _optimize(self, cost: np.ndarray) -> str:
        n, m = self.n, self.m
        degenerate_run = 0
        while True:
            self.iterations += 1
            if self.iterations % _CHECK_INTERVAL == 0:
                if self.deadline is not None and time.monotonic() > self.deadline:
                    return LP_TIMEOUT
                if self.cancel is not None and self.cancel.is_set():
                    return LP_TIMEOUT
            if self.iterations % _REFRESH_INTERVAL == 0:
                self._refresh_xb()

            y = cost[self.basis] @ self.binv
            d = np.empty(self.total)
            d[:n] = cost[:n] - y @ self.prep.a
            d[n : n + m] = cost[n : n + m] - y
            d[n + m :] = cost[n + m :] - self.art_sign * y

            movable = ~self.in_basis & (self.lo < self.hi)
            at_lower = np.abs(self.val - self.lo) <= 1e-9
            eligible_up = movable & at_lower & (d > _RCOST_TOL)
            eligible_dn = movable & ~at_lower & (d < -_RCOST_TOL)
            eligible = eligible_up | eligible_dn
            if not eligible.any():
                return LP_OPTIMAL

            if degenerate_run >= _BLAND_TRIGGER:
                j = int(np.argmax(eligible))  # lowest eligible index (Bland)
            else:
                scores = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(scores))
            direction = 1.0 if eligible_up[j] else -1.0

            w = self.ftran(j)
            step, leave_row, leave_to_upper = self._ratio_test(j, direction, w)
            if step is None:
                return LP_UNBOUNDED
            if step <= _DEGENERATE_STEP:
                degenerate_run += 1
            else:
                degenerate_run = 0

            if leave_row is None:
                # Bound flip: entering variable crosses to its opposite bound.
                self.xb -= direction * step * w
                self.val[j] = self.hi[j] if direction > 0 else self.lo[j]
            else:
                self._apply_pivot(j, direction, step, leave_row, w, leave_to_upper)

    def _ratio_test(self, j, direction, w):
        """Max step for entering j; returns (step, leaving_row, leaving_to_upper)."""
        xb, basis = self.xb, self.basis
        lo_b = self.lo[basis]
        hi_b = self.hi[basis]
        dx = direction * w
        step_limit = self.hi[j] - self.lo[j]  # bound-flip distance

        with np.errstate(divide="ignore", invalid="ignore"):
            to_lower = np.where(dx > _PIVOT_TOL, (xb - lo_b) / dx, np.inf)
            to_upper = np.where(dx < -_PIVOT_TOL, (xb - hi_b) / dx, np.inf)
        to_lower = np.where(np.isnan(to_lower), np.inf, to_lower)
        to_upper = np.where(np.isnan(to_upper), np.inf, to_upper)
        per_row = np.maximum(np.minimum(to_lower, to_upper), 0.0)

        min_row_step = float(per_row.min()) if per_row.size else np.inf
        if not np.isfinite(min(min_row_step, step_limit)):
            return None, None, False
        if step_limit <= min_row_step:
            return float(step_limit), None, False
        # Tie-break on smallest basic variable index for determinism.
        rows = np.flatnonzero(per_row <= min_row_step + 1e-12)
        leave_row = int(rows[np.argmin(basis[rows])])
        leave_to_upper = bool(to_upper[leave_row] <= to_lower[leave_row])
        return min_row_step, leave_row, leave_to_upper

    def _apply_pivot(self, j, direction, step, leave_row, w, leave_to_upper):
        enter_value = (self.lo[j] if direction > 0 else self.hi[j]) + direction * step
        self.xb -= direction * step * w
        leaving = self.basis[leave_row]
        self.val[leaving] = self.hi[leaving] if leave_to_upper else self.lo[leaving]
        if leaving >= self.n + self.m:
            self.val[leaving] = 0.0
            self.hi[leaving] = 0.0  # an artificial never re-enters
        self._pivot(j, leave_row, w, enter_value=enter_value)

    def _pivot(self, j, leave_row, w, enter_value):
        leaving = self.basis[leave_row]
        self.in_basis[leaving] = False
        self.in_basis[j] = True
        self.basis[leave_row] = j
        pivot = w[leave_row]
        self.binv[leave_row] /= pivot
        factor = w.copy()
        factor[leave_row] = 0.0
        self.binv -= np.outer(factor, self.binv[leave_row])
        self.xb[leave_row] = enter_value

    def _structural_values(self) -> np.ndarray:
        x = self.val[: self.n].copy()
        for r in range(self.m):
            if self.basis[r] < self.n:
                x[self.basis[r]] = self.xb[r]
        np.clip(x, self.lo[: self.n], self.hi[: self.n], out=x)
        return x
