"""Extract per-assignment objective coefficients from a trained policy.

Two procedures produce the coefficient matrix consumed by the
coefficient-weighted IP:

* Monte Carlo (n >= 1): run n full episodes with uniformly shuffled slot
  orders, record the masked policy's probability vector for each slot at the
  step it comes up, and average. A rollout that dead-ends before reaching a
  slot contributes 0 for every pilot on that slot.
* Blank slate (n = 0): evaluate every slot as if it were the first slot of a
  fresh episode, so no earlier decision can bias the probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .domain import ScheduleInstance, slot_order
from .errors import CrewSchedError
from .rl import env as des
from .rl.net import PolicyWeights, policy_forward
from .rl.schedule import check_compatible, reward_config_from
from .seeding import stream_rng

MONTECARLO = "montecarlo"
BLANK_SLATE = "blank_slate"


@dataclass(frozen=True)
class CoefficientMatrix:
    values: dict[tuple[int, int], float]
    method: str
    n: int
    metadata: dict[str, Any] = field(default_factory=dict)

    def check(self, inst: ScheduleInstance) -> None:
        """Every eligible pair present, values in [0,1], per-slot sums <= 1."""
        per_slot: dict[int, float] = {}
        for slot in inst.slots:
            for pid in inst.eligible_pilots(slot.id):
                if (pid, slot.id) not in self.values:
                    raise CrewSchedError(f"missing pair (pilot {pid}, slot {slot.id})")
        for (pid, sid), v in self.values.items():
            if not inst.is_eligible(pid, sid):
                raise CrewSchedError(f"ineligible pair (pilot {pid}, slot {sid}) present")
            if not 0.0 <= v <= 1.0:
                raise CrewSchedError(f"coefficient {v} outside [0, 1]")
            per_slot[sid] = per_slot.get(sid, 0.0) + v
        for sid, total in per_slot.items():
            if total > 1.0 + 1e-9:
                raise CrewSchedError(f"slot {sid} coefficients sum to {total} > 1")


def _eligible_pairs(inst: ScheduleInstance) -> list[tuple[int, int]]:
    return [
        (pid, slot.id) for slot in inst.slots for pid in inst.eligible_pilots(slot.id)
    ]


def extract_montecarlo(
    weights: PolicyWeights,
    inst: ScheduleInstance,
    n: int,
    seed: int = 0,
    sample_actions: bool = True,
) -> CoefficientMatrix:
    """Average each pair's probability over n shuffled-order rollouts."""
    if n < 1:
        raise ValueError("n must be >= 1 (use extract_blank_slate for n = 0)")
    check_compatible(weights, inst)
    cfg = reward_config_from(weights)
    acc = {pair: 0.0 for pair in _eligible_pairs(inst)}
    num_slots = len(inst.slots)

    for rollout in range(n):
        rng = stream_rng(seed, "rollout", rollout)
        order = tuple(int(s) for s in rng.permutation(num_slots))
        state, obs = des.reset(inst, cfg, order=order)
        while obs is not None:
            sid = state.current_slot
            probs, _ = policy_forward(weights, obs)
            for pid in np.flatnonzero(state.availability):
                acc[(int(pid), sid)] += float(probs[pid])
            if sample_actions:
                action = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
                action = min(action, weights.num_pilots - 1)
                if probs[action] <= 0.0:
                    action = int(np.argmax(probs))
            else:
                action = int(np.argmax(probs))
            state, obs, _, _ = des.step(state, action)

    matrix = CoefficientMatrix(
        values={pair: total / n for pair, total in acc.items()},
        method=MONTECARLO,
        n=n,
        metadata={"seed": seed, "sample_actions": sample_actions, **weights.metadata},
    )
    matrix.check(inst)
    return matrix


def extract_blank_slate(
    weights: PolicyWeights, inst: ScheduleInstance
) -> CoefficientMatrix:
    """Read each slot's probabilities from an empty-schedule state; the result
    is independent of any slot ordering and fully deterministic."""
    check_compatible(weights, inst)
    cfg = reward_config_from(weights)
    canonical = slot_order(inst)
    values: dict[tuple[int, int], float] = {}
    for sid in range(len(inst.slots)):
        rest = tuple(s for s in canonical if s != sid)
        state, obs = des.reset(inst, cfg, order=(sid,) + rest)
        eligible = inst.eligible_pilots(sid)
        if obs is None:
            # No pilot can take this slot even with an empty schedule.
            for pid in eligible:
                values[(pid, sid)] = 0.0
            continue
        probs, _ = policy_forward(weights, obs)
        for pid in eligible:
            values[(pid, sid)] = float(probs[pid])
    matrix = CoefficientMatrix(
        values=values, method=BLANK_SLATE, n=0, metadata=dict(weights.metadata)
    )
    matrix.check(inst)
    return matrix


def extract(
    weights: PolicyWeights, inst: ScheduleInstance, n: int, seed: int = 0
) -> CoefficientMatrix:
    """n = 0 selects the blank-slate method, n >= 1 the Monte Carlo method."""
    if n == 0:
        return extract_blank_slate(weights, inst)
    return extract_montecarlo(weights, inst, n, seed=seed)
