"""Immutable problem data model: pilots, flights, slots, schedules.

Days are 0-based integers counted from the start of the scheduling horizon.
All day intervals (flight spans, leave windows) are inclusive on both ends,
so a flight with start_day == end_day is a same-day event of duration 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidInstanceError

MISSION = "mission"
SIMULATOR = "simulator"


@dataclass(frozen=True)
class Pilot:
    id: int
    qualifications: frozenset[int]
    leave: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        for start, end in self.leave:
            if start > end:
                raise InvalidInstanceError(
                    f"pilot {self.id}: leave interval [{start}, {end}] reversed"
                )

    def on_leave_during(self, start_day: int, end_day: int) -> bool:
        """True if any leave interval intersects the inclusive [start_day, end_day]."""
        return any(ls <= end_day and start_day <= le for ls, le in self.leave)


@dataclass(frozen=True)
class Flight:
    id: int
    kind: str  # MISSION or SIMULATOR
    flight_type: int
    start_day: int
    end_day: int
    slots: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in (MISSION, SIMULATOR):
            raise InvalidInstanceError(f"flight {self.id}: unknown kind {self.kind!r}")
        if self.start_day > self.end_day:
            raise InvalidInstanceError(f"flight {self.id}: start after end")
        if self.kind == SIMULATOR and self.start_day != self.end_day:
            raise InvalidInstanceError(f"flight {self.id}: simulators are same-day events")

    @property
    def duration_days(self) -> int:
        return self.end_day - self.start_day


@dataclass(frozen=True)
class Slot:
    id: int
    flight_id: int
    required_qualification: int


@dataclass(frozen=True)
class ScheduleInstance:
    """A complete, immutable scheduling problem.

    training_matrix[pilot_id][flight_id] counts how many training-requirement
    fulfillments the pilot could earn by flying that flight; trq_flags carries
    each flight's pair of requirement-qualifier booleans. Both feed the
    scheduling environment's observation vector and nothing else.
    """

    pilots: tuple[Pilot, ...]
    flights: tuple[Flight, ...]
    slots: tuple[Slot, ...]
    horizon_days: int
    num_flight_types: int
    training_matrix: tuple[tuple[int, ...], ...]
    trq_flags: tuple[tuple[bool, bool], ...]
    slots_per_flight_bounds: tuple[int, int] = (2, 3)

    def __post_init__(self) -> None:
        if self.horizon_days < 1:
            raise InvalidInstanceError("horizon_days must be >= 1")
        if [p.id for p in self.pilots] != list(range(len(self.pilots))):
            raise InvalidInstanceError("pilot ids must be 0..P-1 in order")
        if [f.id for f in self.flights] != list(range(len(self.flights))):
            raise InvalidInstanceError("flight ids must be 0..F-1 in order")
        if [s.id for s in self.slots] != list(range(len(self.slots))):
            raise InvalidInstanceError("slot ids must be 0..S-1 in order")
        lo, hi = self.slots_per_flight_bounds
        for f in self.flights:
            if not 0 <= f.start_day <= f.end_day < self.horizon_days:
                raise InvalidInstanceError(f"flight {f.id}: days outside horizon")
            if f.flight_type < 0 or f.flight_type >= self.num_flight_types:
                raise InvalidInstanceError(f"flight {f.id}: type outside universe")
            if not lo <= len(f.slots) <= hi:
                raise InvalidInstanceError(
                    f"flight {f.id}: {len(f.slots)} slots outside [{lo}, {hi}]"
                )
            for sid in f.slots:
                if not 0 <= sid < len(self.slots) or self.slots[sid].flight_id != f.id:
                    raise InvalidInstanceError(f"flight {f.id}: inconsistent slot list")
        owned = sorted(sid for f in self.flights for sid in f.slots)
        if owned != list(range(len(self.slots))):
            raise InvalidInstanceError("every slot must belong to exactly one flight")
        if len(self.training_matrix) != len(self.pilots) or any(
            len(row) != len(self.flights) for row in self.training_matrix
        ):
            raise InvalidInstanceError("training_matrix must be P x F")
        if any(v < 0 for row in self.training_matrix for v in row):
            raise InvalidInstanceError("training_matrix entries must be >= 0")
        if len(self.trq_flags) != len(self.flights):
            raise InvalidInstanceError("trq_flags must have one pair per flight")

    @property
    def num_pilots(self) -> int:
        return len(self.pilots)

    def flight_of_slot(self, slot_id: int) -> Flight:
        return self.flights[self.slots[slot_id].flight_id]

    def is_eligible(self, pilot_id: int, slot_id: int) -> bool:
        """Pilot holds the slot's qualification and the flight avoids their leave."""
        pilot = self.pilots[pilot_id]
        slot = self.slots[slot_id]
        if slot.required_qualification not in pilot.qualifications:
            return False
        flight = self.flights[slot.flight_id]
        return not pilot.on_leave_during(flight.start_day, flight.end_day)

    def eligible_pilots(self, slot_id: int) -> list[int]:
        return [p.id for p in self.pilots if self.is_eligible(p.id, slot_id)]

    def eligible_slots_on_flight(self, pilot_id: int, flight_id: int) -> list[int]:
        return [
            sid for sid in self.flights[flight_id].slots if self.is_eligible(pilot_id, sid)
        ]


@dataclass(frozen=True)
class Schedule:
    """A pilot-per-slot assignment map; partial maps only when complete is False."""

    assignment: dict[int, int]
    complete: bool

    def pilot_for(self, slot_id: int) -> int | None:
        return self.assignment.get(slot_id)


@dataclass(frozen=True)
class Violation:
    kind: str  # leave | qualification | same_flight | coverage | flight_conflict | unknown_id
    slot_ids: tuple[int, ...] = ()
    pilot_id: int | None = None
    detail: str = ""


def flights_conflict(f: Flight, g: Flight) -> bool:
    """True iff distinct flights' inclusive day intervals intersect."""
    if f.id == g.id:
        return False
    return f.start_day <= g.end_day and g.start_day <= f.end_day


def buffer_days(earlier_end: int, later_start: int) -> int:
    """Full days strictly between an event ending and the next one starting.

    An event ending on day 1 followed by one starting on day 5 leaves days
    2, 3 and 4 free: a buffer of 3.
    """
    if later_start <= earlier_end:
        raise ValueError(
            f"later_start ({later_start}) must exceed earlier_end ({earlier_end}); "
            "overlapping or reversed events have no buffer"
        )
    return later_start - earlier_end - 1


def validate_schedule(inst: ScheduleInstance, sched: Schedule) -> list[Violation]:
    """Check every schedule invariant; an empty list means the schedule is valid.

    Violation kinds: unknown_id, coverage (complete schedules must cover every
    slot exactly once), qualification, leave, same_flight (one pilot twice on
    a flight), flight_conflict (one pilot on two overlapping flights).
    """
    violations: list[Violation] = []
    num_slots = len(inst.slots)
    num_pilots = len(inst.pilots)

    clean: dict[int, int] = {}
    for slot_id, pilot_id in sched.assignment.items():
        if not (0 <= slot_id < num_slots) or not (0 <= pilot_id < num_pilots):
            violations.append(
                Violation(
                    kind="unknown_id",
                    slot_ids=(slot_id,),
                    pilot_id=pilot_id,
                    detail=f"slot {slot_id} -> pilot {pilot_id} references unknown ids",
                )
            )
            continue
        clean[slot_id] = pilot_id

    if sched.complete:
        missing = [sid for sid in range(num_slots) if sid not in clean]
        if missing:
            violations.append(
                Violation(
                    kind="coverage",
                    slot_ids=tuple(missing),
                    detail=f"{len(missing)} slot(s) unassigned in a complete schedule",
                )
            )

    for slot_id, pilot_id in sorted(clean.items()):
        slot = inst.slots[slot_id]
        pilot = inst.pilots[pilot_id]
        flight = inst.flights[slot.flight_id]
        if slot.required_qualification not in pilot.qualifications:
            violations.append(
                Violation(
                    kind="qualification",
                    slot_ids=(slot_id,),
                    pilot_id=pilot_id,
                    detail=f"pilot {pilot_id} lacks qualification "
                    f"{slot.required_qualification} for slot {slot_id}",
                )
            )
        if pilot.on_leave_during(flight.start_day, flight.end_day):
            violations.append(
                Violation(
                    kind="leave",
                    slot_ids=(slot_id,),
                    pilot_id=pilot_id,
                    detail=f"pilot {pilot_id} is on leave during flight {flight.id}",
                )
            )

    by_pilot_flight: dict[tuple[int, int], list[int]] = {}
    for slot_id, pilot_id in sorted(clean.items()):
        key = (pilot_id, inst.slots[slot_id].flight_id)
        by_pilot_flight.setdefault(key, []).append(slot_id)
    for (pilot_id, flight_id), slot_ids in sorted(by_pilot_flight.items()):
        if len(slot_ids) > 1:
            violations.append(
                Violation(
                    kind="same_flight",
                    slot_ids=tuple(slot_ids),
                    pilot_id=pilot_id,
                    detail=f"pilot {pilot_id} holds {len(slot_ids)} slots on flight {flight_id}",
                )
            )

    pilot_flights: dict[int, list[int]] = {}
    for (pilot_id, flight_id) in sorted(by_pilot_flight):
        pilot_flights.setdefault(pilot_id, []).append(flight_id)
    for pilot_id, flight_ids in sorted(pilot_flights.items()):
        for i, fa in enumerate(flight_ids):
            for fb in flight_ids[i + 1 :]:
                if flights_conflict(inst.flights[fa], inst.flights[fb]):
                    violations.append(
                        Violation(
                            kind="flight_conflict",
                            slot_ids=tuple(
                                sorted(
                                    by_pilot_flight[(pilot_id, fa)]
                                    + by_pilot_flight[(pilot_id, fb)]
                                )
                            ),
                            pilot_id=pilot_id,
                            detail=f"pilot {pilot_id} on overlapping flights {fa} and {fb}",
                        )
                    )
    return violations


def slot_order(inst: ScheduleInstance) -> list[int]:
    """Deterministic scheduling order for slots.

    Slots sort by their flight's start day, then flight id as the tie-breaker,
    then ascending required qualification within the flight (slot id last so
    the order is total).
    """
    def key(slot: Slot) -> tuple[int, int, int, int]:
        flight = inst.flights[slot.flight_id]
        return (flight.start_day, flight.id, slot.required_qualification, slot.id)

    return [s.id for s in sorted(inst.slots, key=key)]
