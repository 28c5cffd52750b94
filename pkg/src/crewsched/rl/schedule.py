"""Build schedules directly from a trained policy."""

from __future__ import annotations

import numpy as np

from ..domain import Schedule, ScheduleInstance
from ..errors import CrewSchedError
from . import env as des
from .net import PolicyWeights, policy_forward

GREEDY = "greedy"
SAMPLE = "sample"


def reward_config_from(weights: PolicyWeights) -> des.RewardConfig:
    meta = weights.metadata
    return des.RewardConfig(
        horizon=int(meta["horizon"]),
        variant=meta.get("reward_variant", des.BUFFER_VARIANT),
        t_move=int(meta.get("t_move", 2)),
    )


def check_compatible(weights: PolicyWeights, inst: ScheduleInstance) -> None:
    """The network shape is bound to the roster it was trained on."""
    if inst.num_pilots != weights.num_pilots:
        raise CrewSchedError(
            f"policy trained for {weights.num_pilots} pilots, instance has {inst.num_pilots}"
        )
    expected = des.observation_size(inst.num_pilots, inst.num_flight_types)
    if expected != weights.input_dim:
        raise CrewSchedError(
            f"observation size {expected} does not match network input {weights.input_dim}"
        )


def rl_schedule(
    weights: PolicyWeights,
    inst: ScheduleInstance,
    mode: str = GREEDY,
    seed: int | None = None,
    order: tuple[int, ...] | None = None,
) -> Schedule:
    """Roll the environment to termination, assigning the argmax-probability
    pilot (greedy) or sampling; the result may be incomplete."""
    if mode not in (GREEDY, SAMPLE):
        raise CrewSchedError(f"unknown mode {mode!r}")
    check_compatible(weights, inst)
    rng = np.random.default_rng(0 if seed is None else seed)
    state, obs = des.reset(inst, reward_config_from(weights), order=order)
    while obs is not None:
        probs, _ = policy_forward(weights, obs)
        if mode == GREEDY:
            action = int(np.argmax(probs))
        else:
            action = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
            action = min(action, weights.num_pilots - 1)
            if probs[action] <= 0.0:
                action = int(np.argmax(probs))
        state, obs, _, _ = des.step(state, action)
    return state.schedule()
