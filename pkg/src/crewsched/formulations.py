"""Translate scheduling instances into 0/1 programs and decode solutions.

All builders share one constraint core: an assignment variable exists only
for eligible (pilot, slot) pairs — a pilot qualified for the slot whose
leave avoids the flight — which silently enforces the qualification and
leave restrictions. On top of that core sit per-flight caps, exact slot
coverage, and pairwise conflict rows. The robust variants add pilot-flight
indicator variables plus consecutive-pair or move-up indicator variables
with linking rows that make them exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .domain import Schedule, ScheduleInstance, buffer_days, flights_conflict
from .errors import CrewSchedError, InfeasibleModelError
from .solver import EQ, GE, LE, MAXIMIZE, IpInstance, LinearConstraint, SolveResult


@dataclass
class VariableCatalog:
    """Bidirectional map between model variables and scheduling entities."""

    num_pilots: int
    num_slots: int
    pilot_slot: dict[tuple[int, int], int] = field(default_factory=dict)
    pilot_flight: dict[tuple[int, int], int] = field(default_factory=dict)
    buffer_vars: dict[tuple[int, int, int], int] = field(default_factory=dict)
    moveup_vars: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    var_names: list[str] = field(default_factory=list)

    def new_var(self, name: str) -> int:
        self.var_names.append(name)
        return len(self.var_names) - 1

    @property
    def num_vars(self) -> int:
        return len(self.var_names)


def penalty(b: int, t_buffer: int) -> float:
    """Linear buffer penalty: -1 at b=0 rising to just below 0 at b=t_buffer."""
    if not 0 <= b <= t_buffer:
        raise ValueError(f"buffer {b} outside [0, {t_buffer}]")
    return -(t_buffer + 1 - b) / (t_buffer + 1)


@dataclass(frozen=True)
class BufferPenaltyTable:
    t_buffer: int
    values: tuple[float, ...]

    @classmethod
    def from_threshold(cls, t_buffer: int) -> "BufferPenaltyTable":
        if t_buffer < 0:
            raise ValueError("t_buffer must be >= 0")
        return cls(t_buffer, tuple(penalty(b, t_buffer) for b in range(t_buffer + 1)))

    def __post_init__(self) -> None:
        if len(self.values) != self.t_buffer + 1:
            raise ValueError("one penalty per buffer length in [0, t_buffer]")
        if self.values[0] != -1.0:
            raise ValueError("penalty at buffer 0 must be -1")
        if any(v >= 0 for v in self.values):
            raise ValueError("penalties must be negative")
        if any(b >= a for a, b in zip(self.values[1:], self.values)):
            raise ValueError("penalties must increase strictly with buffer length")


def _baseline_core(inst: ScheduleInstance) -> tuple[VariableCatalog, list[LinearConstraint]]:
    """Assignment variables and the shared constraint rows.

    Raises InfeasibleModelError as soon as some slot has no eligible pilot,
    which no assignment can repair.
    """
    cat = VariableCatalog(num_pilots=inst.num_pilots, num_slots=len(inst.slots))
    for slot in inst.slots:
        eligible = inst.eligible_pilots(slot.id)
        if not eligible:
            raise InfeasibleModelError(f"slot {slot.id} has no eligible pilot")
        for pid in eligible:
            cat.pilot_slot[(pid, slot.id)] = cat.new_var(f"X_p{pid}_s{slot.id}")

    rows: list[LinearConstraint] = []
    # Exactly one pilot per slot.
    for slot in inst.slots:
        terms = tuple(
            (cat.pilot_slot[(pid, slot.id)], 1.0)
            for pid in range(inst.num_pilots)
            if (pid, slot.id) in cat.pilot_slot
        )
        rows.append(LinearConstraint(terms, EQ, 1.0))
    # At most one slot per pilot on any one flight (vacuous with <2 options).
    eligible_on: dict[tuple[int, int], list[int]] = {}
    for pid in range(inst.num_pilots):
        for flight in inst.flights:
            slots = [s for s in flight.slots if (pid, s) in cat.pilot_slot]
            if slots:
                eligible_on[(pid, flight.id)] = slots
            if len(slots) >= 2:
                rows.append(
                    LinearConstraint(
                        tuple((cat.pilot_slot[(pid, s)], 1.0) for s in slots), LE, 1.0
                    )
                )
    # No pilot on two conflicting flights.
    for pid in range(inst.num_pilots):
        for fa in inst.flights:
            if (pid, fa.id) not in eligible_on:
                continue
            for fb in inst.flights[fa.id + 1 :]:
                if (pid, fb.id) not in eligible_on:
                    continue
                if not flights_conflict(fa, fb):
                    continue
                terms = tuple(
                    (cat.pilot_slot[(pid, s)], 1.0)
                    for s in eligible_on[(pid, fa.id)] + eligible_on[(pid, fb.id)]
                )
                rows.append(LinearConstraint(terms, LE, 1.0))
    return cat, rows


def build_baseline_ip(inst: ScheduleInstance) -> tuple[IpInstance, VariableCatalog]:
    """Feasibility formulation: maximize filled slots (constant over feasible
    schedules because coverage is an equality)."""
    cat, rows = _baseline_core(inst)
    objective = tuple((idx, 1.0) for idx in cat.pilot_slot.values())
    ip = IpInstance(
        num_vars=cat.num_vars,
        objective=objective,
        sense=MAXIMIZE,
        constraints=tuple(rows),
        var_names=tuple(cat.var_names),
    )
    return ip, cat


def build_nice_ip(
    inst: ScheduleInstance, coeffs: "CoefficientMatrix | dict[tuple[int, int], float]"
) -> tuple[IpInstance, VariableCatalog]:
    """Baseline constraints with per-assignment objective coefficients taken
    from a trained policy's output probabilities."""
    values = coeffs if isinstance(coeffs, dict) else coeffs.values
    cat, rows = _baseline_core(inst)
    objective = []
    for (pid, sid), idx in cat.pilot_slot.items():
        if (pid, sid) not in values:
            raise CrewSchedError(f"coefficient missing for eligible pair (pilot {pid}, slot {sid})")
        objective.append((idx, float(values[(pid, sid)])))
    ip = IpInstance(
        num_vars=cat.num_vars,
        objective=tuple(objective),
        sense=MAXIMIZE,
        constraints=tuple(rows),
        var_names=tuple(cat.var_names),
    )
    return ip, cat


def _add_pilot_flight_indicators(
    inst: ScheduleInstance, cat: VariableCatalog, rows: list[LinearConstraint]
) -> None:
    """Y variables equal to 1 exactly when the pilot flies any slot of the
    flight (the per-flight cap makes the slot sum binary)."""
    for pid in range(inst.num_pilots):
        for flight in inst.flights:
            slots = [s for s in flight.slots if (pid, s) in cat.pilot_slot]
            if not slots:
                continue
            y = cat.new_var(f"Y_p{pid}_f{flight.id}")
            cat.pilot_flight[(pid, flight.id)] = y
            terms = ((y, 1.0),) + tuple((cat.pilot_slot[(pid, s)], -1.0) for s in slots)
            rows.append(LinearConstraint(terms, EQ, 0.0))


def build_buffer_ip(
    inst: ScheduleInstance, t_buffer: int, soft_coverage: bool = False
) -> tuple[IpInstance, VariableCatalog]:
    """Penalize consecutive flight pairs with short rest buffers.

    A pair variable exists per pilot and ordered flight pair whose buffer lies
    in [0, t_buffer]; wider pairs carry no penalty and no variable. Linking
    rows pin the variable to 1 exactly when the pilot flies both flights with
    no other assigned flight strictly between them. Coverage stays a hard
    equality by default, so the objective is the pure penalty sum; in
    soft-coverage mode coverage relaxes to <= 1 and a dominant per-slot reward
    keeps full coverage preferable to any penalty saving.
    """
    if t_buffer < 0:
        raise ValueError("t_buffer must be >= 0")
    table = BufferPenaltyTable.from_threshold(t_buffer)
    cat, rows = _baseline_core(inst)
    _add_pilot_flight_indicators(inst, cat, rows)

    objective: list[tuple[int, float]] = []
    for pid in range(inst.num_pilots):
        flown = [f for f in inst.flights if (pid, f.id) in cat.pilot_flight]
        for fa in flown:
            for fb in flown:
                if fb.start_day <= fa.end_day:
                    continue
                gap = buffer_days(fa.end_day, fb.start_day)
                if gap > t_buffer:
                    continue
                b = cat.new_var(f"B_p{pid}_f{fa.id}_f{fb.id}")
                cat.buffer_vars[(pid, fa.id, fb.id)] = b
                y_a = cat.pilot_flight[(pid, fa.id)]
                y_b = cat.pilot_flight[(pid, fb.id)]
                between = [
                    cat.pilot_flight[(pid, g.id)]
                    for g in flown
                    if g.start_day > fa.end_day and g.end_day < fb.start_day
                ]
                rows.append(LinearConstraint(((b, 1.0), (y_a, -1.0)), LE, 0.0))
                rows.append(LinearConstraint(((b, 1.0), (y_b, -1.0)), LE, 0.0))
                for y_g in between:
                    rows.append(LinearConstraint(((b, 1.0), (y_g, 1.0)), LE, 1.0))
                lower = ((b, 1.0), (y_a, -1.0), (y_b, -1.0)) + tuple(
                    (y_g, 1.0) for y_g in between
                )
                rows.append(LinearConstraint(lower, GE, -1.0))
                objective.append((b, table.values[gap]))

    constraints = list(rows)
    if soft_coverage:
        constraints = _soften_coverage(constraints, len(inst.slots))
        weight = sum(abs(c) for _, c in objective) + 1.0
        objective += [(idx, weight) for idx in cat.pilot_slot.values()]
    ip = IpInstance(
        num_vars=cat.num_vars,
        objective=tuple(objective),
        sense=MAXIMIZE,
        constraints=tuple(constraints),
        var_names=tuple(cat.var_names),
    )
    return ip, cat


def build_moveup_ip(
    inst: ScheduleInstance, t_move: int, soft_coverage: bool = False
) -> tuple[IpInstance, VariableCatalog]:
    """Maximize the count of move-up pilots: a pilot on flight g who could
    step into slot s on an earlier flight f.

    Tuples failing the static screens (timing windows, qualification, leave)
    never materialize a variable; the dynamic part — the pilot must fly g,
    must not be on f, and must not be on any flight starting before f that
    overlaps f — is enforced by linking rows.
    """
    if t_move < 0:
        raise ValueError("t_move must be >= 0")
    cat, rows = _baseline_core(inst)
    _add_pilot_flight_indicators(inst, cat, rows)

    objective: list[tuple[int, float]] = []
    for pid in range(inst.num_pilots):
        flown = [f for f in inst.flights if (pid, f.id) in cat.pilot_flight]
        for g in flown:
            for f in inst.flights:
                if f.id == g.id:
                    continue
                if not (f.start_day <= g.start_day <= f.start_day + t_move):
                    continue
                if g.end_day < f.end_day:
                    continue
                earlier_overlaps = [
                    cat.pilot_flight[(pid, h.id)]
                    for h in flown
                    if h.start_day < f.start_day and flights_conflict(h, f)
                ]
                y_g = cat.pilot_flight[(pid, g.id)]
                y_f = cat.pilot_flight.get((pid, f.id))
                for sid in f.slots:
                    if not inst.is_eligible(pid, sid):
                        continue
                    m = cat.new_var(f"M_p{pid}_g{g.id}_f{f.id}_s{sid}")
                    cat.moveup_vars[(pid, g.id, f.id, sid)] = m
                    rows.append(LinearConstraint(((m, 1.0), (y_g, -1.0)), LE, 0.0))
                    blockers = list(earlier_overlaps)
                    if y_f is not None:
                        blockers.append(y_f)
                    for y_h in blockers:
                        rows.append(LinearConstraint(((m, 1.0), (y_h, 1.0)), LE, 1.0))
                    lower = ((m, 1.0), (y_g, -1.0)) + tuple((y_h, 1.0) for y_h in blockers)
                    rows.append(LinearConstraint(lower, GE, 0.0))
                    objective.append((m, 1.0))

    constraints = list(rows)
    if soft_coverage:
        constraints = _soften_coverage(constraints, len(inst.slots))
        weight = float(len(objective)) + 1.0
        objective += [(idx, weight) for idx in cat.pilot_slot.values()]
    ip = IpInstance(
        num_vars=cat.num_vars,
        objective=tuple(objective),
        sense=MAXIMIZE,
        constraints=tuple(constraints),
        var_names=tuple(cat.var_names),
    )
    return ip, cat


def _soften_coverage(
    rows: list[LinearConstraint], num_slots: int
) -> list[LinearConstraint]:
    # The first num_slots rows are the coverage equalities from _baseline_core.
    softened = []
    for r, con in enumerate(rows):
        if r < num_slots:
            softened.append(LinearConstraint(con.terms, LE, con.rhs))
        else:
            softened.append(con)
    return softened


def build_repair_ip(
    delayed: ScheduleInstance, original: Schedule, decision_day: int = 1
) -> tuple[IpInstance, VariableCatalog]:
    """Minimum-change repair after delays: maximize kept assignments.

    Flights already departed by the decision day keep their pilots via
    equality rows; everything else may move, subject to the usual feasibility
    core evaluated on the delayed flight days.
    """
    if not original.complete:
        raise CrewSchedError("repair needs a complete original schedule")
    cat, rows = _baseline_core(delayed)
    for flight in delayed.flights:
        if flight.start_day >= decision_day:
            continue
        for sid in flight.slots:
            pid = original.assignment.get(sid)
            if pid is None:
                raise CrewSchedError(f"original schedule misses slot {sid}")
            idx = cat.pilot_slot.get((pid, sid))
            if idx is None:
                raise InfeasibleModelError(
                    f"departed flight {flight.id} slot {sid}: original pilot ineligible"
                )
            rows.append(LinearConstraint(((idx, 1.0),), EQ, 1.0))
    objective = []
    for sid in range(len(delayed.slots)):
        pid = original.assignment.get(sid)
        if pid is None:
            raise CrewSchedError(f"original schedule misses slot {sid}")
        idx = cat.pilot_slot.get((pid, sid))
        if idx is not None:
            objective.append((idx, 1.0))
    ip = IpInstance(
        num_vars=cat.num_vars,
        objective=tuple(objective),
        sense=MAXIMIZE,
        constraints=tuple(rows),
        var_names=tuple(cat.var_names),
    )
    return ip, cat


def decode(catalog: VariableCatalog, result: SolveResult) -> Schedule:
    """Read the assignment out of a solved model."""
    if not result.has_solution or result.values is None:
        raise CrewSchedError(f"cannot decode a result with status {result.status}")
    assignment: dict[int, int] = {}
    for (pid, sid), idx in catalog.pilot_slot.items():
        if result.values[idx] == 1:
            if sid in assignment:
                raise CrewSchedError(f"slot {sid} covered twice in solver output")
            assignment[sid] = pid
    return Schedule(assignment=assignment, complete=len(assignment) == catalog.num_slots)
