"""Shared test fixtures: tiny instance builders and enumeration oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from crewsched.domain import (
    MISSION,
    Flight,
    Pilot,
    Schedule,
    ScheduleInstance,
    Slot,
    flights_conflict,
    validate_schedule,
)
from crewsched.formulations import penalty
from crewsched.rl.net import PolicyWeights
from crewsched.rl.env import observation_size


def make_instance(
    pilots,
    flight_specs,
    horizon_days=14,
    num_flight_types=1,
    slots_per_flight_bounds=(1, 3),
):
    """flight_specs: list of (kind, ftype, start, end, [qual, ...])."""
    flights, slots = [], []
    for spec in flight_specs:
        kind, ftype, start, end, quals = spec
        slot_ids = []
        for q in quals:
            slot_ids.append(len(slots))
            slots.append(Slot(len(slots), len(flights), q))
        flights.append(Flight(len(flights), kind, ftype, start, end, tuple(slot_ids)))
    training = tuple(tuple(0 for _ in flights) for _ in pilots)
    trq = tuple((False, False) for _ in flights)
    return ScheduleInstance(
        pilots=tuple(pilots),
        flights=tuple(flights),
        slots=tuple(slots),
        horizon_days=horizon_days,
        num_flight_types=num_flight_types,
        training_matrix=training,
        trq_flags=trq,
        slots_per_flight_bounds=slots_per_flight_bounds,
    )


def random_small_instance(rng, max_pilots=4, max_flights=5):
    P = int(rng.integers(2, max_pilots + 1))
    nf = int(rng.integers(2, max_flights + 1))
    nq = int(rng.integers(2, 4))
    pilots = []
    for p in range(P):
        quals = frozenset(
            int(q) for q in rng.choice(nq, size=int(rng.integers(1, nq + 1)), replace=False)
        )
        leave = ()
        if rng.random() < 0.3:
            start = int(rng.integers(0, 6))
            leave = ((start, start + int(rng.integers(0, 2))),)
        pilots.append(Pilot(p, quals, leave))
    specs = []
    for _ in range(nf):
        start = int(rng.integers(0, 6))
        end = min(start + int(rng.integers(0, 3)), 7)
        quals = [int(rng.integers(0, nq)) for _ in range(int(rng.integers(1, 3)))]
        specs.append((MISSION, 0, start, end, quals))
    return make_instance(pilots, specs)


def enumerate_schedules(inst):
    """All complete valid schedules by brute force."""
    eligible = [inst.eligible_pilots(s.id) for s in inst.slots]
    if any(not e for e in eligible):
        return []
    out = []
    for combo in itertools.product(*eligible):
        sched = Schedule(dict(enumerate(combo)), True)
        if not validate_schedule(inst, sched):
            out.append(sched)
    return out


def buffer_score(inst, sched, t_buffer):
    """Objective an optimal buffer program should report for this schedule."""
    per_pilot = {}
    for sid, pid in sched.assignment.items():
        per_pilot.setdefault(pid, set()).add(inst.slots[sid].flight_id)
    score = 0.0
    for fids in per_pilot.values():
        ordered = sorted((inst.flights[f] for f in fids), key=lambda f: f.start_day)
        for a, b in zip(ordered, ordered[1:]):
            gap = b.start_day - a.end_day - 1
            if 0 <= gap <= t_buffer:
                score += penalty(gap, t_buffer)
    return score


def moveup_score(inst, sched, t_move):
    """Count of (pilot, flown flight, slot) move-up tuples in a schedule."""
    per_pilot = {}
    for sid, pid in sched.assignment.items():
        per_pilot.setdefault(pid, set()).add(inst.slots[sid].flight_id)
    count = 0
    for pid, fids in per_pilot.items():
        for gid in fids:
            g = inst.flights[gid]
            for f in inst.flights:
                if f.id == gid or f.id in fids:
                    continue
                if not (f.start_day <= g.start_day <= f.start_day + t_move):
                    continue
                if g.end_day < f.end_day:
                    continue
                if any(
                    inst.flights[h].start_day < f.start_day
                    and flights_conflict(inst.flights[h], f)
                    for h in fids
                ):
                    continue
                count += sum(1 for sid in f.slots if inst.is_eligible(pid, sid))
    return count


def constant_policy(num_pilots, num_flight_types, actor_bias=None, horizon=7, variant="buffer"):
    """Zero network: logits equal the actor bias regardless of observation."""
    input_dim = observation_size(num_pilots, num_flight_types)
    h1, h2 = 8, 8
    params = {
        "w1": np.zeros((input_dim, h1)),
        "b1": np.zeros(h1),
        "w2": np.zeros((h1, h2)),
        "b2": np.zeros(h2),
        "wa": np.zeros((h2, num_pilots)),
        "ba": np.zeros(num_pilots) if actor_bias is None else np.asarray(actor_bias, float),
        "wv": np.zeros((h2, 1)),
        "bv": np.zeros(1),
    }
    return PolicyWeights(
        input_dim=input_dim,
        hidden=(h1, h2),
        num_pilots=num_pilots,
        params=params,
        metadata={
            "reward_variant": variant,
            "horizon": horizon,
            "t_move": 2,
            "num_pilots": num_pilots,
            "num_flight_types": num_flight_types,
            "density": 1.0,
            "seed": 0,
        },
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
