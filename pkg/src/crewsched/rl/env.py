"""Discrete-event scheduling environment.

An episode walks the instance's slots in a fixed order; each step picks a
pilot for the cursor slot. The action mask is per-slot validity against the
partial schedule (qualification, leave, same-flight duplicates, overlapping
flights); it looks one slot ahead only, so an episode can still dead-end on
a later slot. Rewards follow the configured variant:

* buffer: placing a pilot earns the buffer to their most recent event plus
  one, or horizon - 1 for a pilot with no prior event.
* moveup: placing a pilot earns m + 1, where m counts the slots the pilot
  could now step into as a move-up pilot given the partial schedule.

Completing every slot adds +25; a dead end ends the episode at -10.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..domain import Schedule, ScheduleInstance, buffer_days, flights_conflict, slot_order
from ..errors import CrewSchedError

BUFFER_VARIANT = "buffer"
MOVEUP_VARIANT = "moveup"


@dataclass(frozen=True)
class RewardConfig:
    horizon: int
    variant: str = BUFFER_VARIANT
    complete_bonus: float = 25.0
    incomplete_penalty: float = -10.0
    t_move: int = 2

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.variant not in (BUFFER_VARIANT, MOVEUP_VARIANT):
            raise ValueError(f"unknown reward variant {self.variant!r}")


@dataclass(frozen=True)
class EnvState:
    instance: ScheduleInstance
    cfg: RewardConfig
    order: tuple[int, ...]
    cursor: int
    assignment: dict[int, int]
    pilot_flights: dict[int, tuple[int, ...]]
    availability: np.ndarray | None  # mask for the cursor slot; None when done
    complete: bool

    @property
    def done(self) -> bool:
        return self.availability is None

    @property
    def current_slot(self) -> int:
        if self.done:
            raise CrewSchedError("episode is over")
        return self.order[self.cursor]

    def schedule(self) -> Schedule:
        return Schedule(assignment=dict(self.assignment), complete=self.complete)


def observation_size(num_pilots: int, num_flight_types: int) -> int:
    return 3 * num_pilots + num_flight_types + 5


def _availability(
    inst: ScheduleInstance, slot_id: int, pilot_flights: dict[int, tuple[int, ...]]
) -> np.ndarray:
    """Mask of pilots whose assignment to slot_id keeps the partial schedule valid."""
    flight = inst.flight_of_slot(slot_id)
    mask = np.zeros(inst.num_pilots)
    for pid in range(inst.num_pilots):
        if not inst.is_eligible(pid, slot_id):
            continue
        flown = pilot_flights.get(pid, ())
        if flight.id in flown:
            continue
        if any(flights_conflict(flight, inst.flights[fid]) for fid in flown):
            continue
        mask[pid] = 1.0
    return mask


def build_observation(state: EnvState) -> np.ndarray:
    """Feature vector for the cursor slot: availability, event type one-hot,
    requirement qualifiers, co-assigned pilots, normalized timing scalars, and
    per-pilot training fulfillment counts."""
    inst, cfg = state.instance, state.cfg
    slot_id = state.current_slot
    flight = inst.flight_of_slot(slot_id)
    P = inst.num_pilots
    horizon = float(cfg.horizon)

    onehot = np.zeros(inst.num_flight_types)
    onehot[flight.flight_type] = 1.0
    trq = np.array([float(b) for b in inst.trq_flags[flight.id]])
    assigned = np.zeros(P)
    for sid in flight.slots:
        pid = state.assignment.get(sid)
        if pid is not None:
            assigned[pid] = 1.0
    scalars = np.array(
        [
            flight.duration_days / horizon,
            flight.start_day / horizon,
            flight.end_day / horizon,
        ]
    )
    training = np.array(
        [inst.training_matrix[pid][flight.id] for pid in range(P)], dtype=float
    ) / horizon
    return np.concatenate([state.availability, onehot, trq, assigned, scalars, training])


def reset(
    inst: ScheduleInstance,
    cfg: RewardConfig,
    order: tuple[int, ...] | None = None,
) -> tuple[EnvState, np.ndarray | None]:
    """Fresh episode; a custom slot order may replace the canonical one."""
    if order is None:
        order = tuple(slot_order(inst))
    else:
        if sorted(order) != list(range(len(inst.slots))):
            raise CrewSchedError("order must be a permutation of all slot ids")
    if len(order) == 0:
        state = EnvState(inst, cfg, order, 0, {}, {}, None, True)
        return state, None
    avail = _availability(inst, order[0], {})
    if not avail.any():
        state = EnvState(inst, cfg, order, 0, {}, {}, None, False)
        return state, None
    state = EnvState(inst, cfg, order, 0, {}, {}, avail, False)
    return state, build_observation(state)


def _moveup_count(
    inst: ScheduleInstance,
    pilot: int,
    g_id: int,
    pilot_flights: tuple[int, ...],
    t_move: int,
) -> int:
    """Slots the pilot (just placed on flight g) could move up to, judged
    against the flights they hold in the partial schedule."""
    g = inst.flights[g_id]
    count = 0
    for f in inst.flights:
        if f.id == g_id or f.id in pilot_flights:
            continue
        if not (f.start_day <= g.start_day <= f.start_day + t_move):
            continue
        if g.end_day < f.end_day:
            continue
        if any(
            inst.flights[h].start_day < f.start_day
            and flights_conflict(inst.flights[h], f)
            for h in pilot_flights
        ):
            continue
        for sid in f.slots:
            if inst.is_eligible(pilot, sid):
                count += 1
    return count


def step(
    state: EnvState, pilot: int
) -> tuple[EnvState, np.ndarray | None, float, bool]:
    """Assign pilot to the cursor slot. Returns (state, observation, reward,
    done); observation is None exactly when done."""
    if state.done:
        raise CrewSchedError("cannot step a finished episode")
    if not state.availability[pilot]:
        raise CrewSchedError(f"pilot {pilot} is masked for slot {state.current_slot}")
    inst, cfg = state.instance, state.cfg
    slot_id = state.current_slot
    flight = inst.flight_of_slot(slot_id)

    prior = state.pilot_flights.get(pilot, ())
    new_flights = prior if flight.id in prior else prior + (flight.id,)
    assignment = dict(state.assignment)
    assignment[slot_id] = pilot
    pilot_flights = dict(state.pilot_flights)
    pilot_flights[pilot] = new_flights

    if cfg.variant == BUFFER_VARIANT:
        if prior:
            # Most recent event before the new flight; under a shuffled slot
            # order the new flight may precede everything the pilot holds, in
            # which case the buffer it forms is with its successor instead.
            pred_ends = [
                inst.flights[fid].end_day
                for fid in prior
                if inst.flights[fid].end_day < flight.start_day
            ]
            if pred_ends:
                reward = float(buffer_days(max(pred_ends), flight.start_day) + 1)
            else:
                succ_start = min(inst.flights[fid].start_day for fid in prior)
                reward = float(buffer_days(flight.end_day, succ_start) + 1)
        else:
            reward = float(cfg.horizon - 1)
    else:
        m = _moveup_count(inst, pilot, flight.id, new_flights, cfg.t_move)
        reward = float(m + 1)

    cursor = state.cursor + 1
    if cursor == len(state.order):
        new_state = EnvState(inst, cfg, state.order, cursor, assignment, pilot_flights, None, True)
        return new_state, None, reward + cfg.complete_bonus, True
    avail = _availability(inst, state.order[cursor], pilot_flights)
    if not avail.any():
        new_state = EnvState(inst, cfg, state.order, cursor, assignment, pilot_flights, None, False)
        return new_state, None, reward + cfg.incomplete_penalty, True
    new_state = EnvState(inst, cfg, state.order, cursor, assignment, pilot_flights, avail, False)
    return new_state, build_observation(new_state), reward, False
