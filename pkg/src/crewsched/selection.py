"""Pick the best (policy, extraction n) combination by disruption ratio.

Every candidate is scored on the same bank of generated instances and delay
realizations: r = mean coefficient-method disruptions / mean baseline
disruptions, so r < 1 means fewer disruptions than the baseline. Candidates
group by (training density, n); the group with the lowest median r wins, and
the returned member is the one whose r sits at that median (lowest candidate
index on ties).
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median

from .disruption import (
    BASELINE,
    NICE,
    DelayScenario,
    TrialContext,
    count_disruptions,
    apply_delays,
    _build_schedule,
)
from .errors import CrewSchedError, InfeasibleModelError
from .formulations import build_repair_ip, decode
from .generator import DatasetProfile, GeneratorConfig, generate_instance
from .rl.net import PolicyWeights
from .seeding import stream_seed
from .solver import solve


@dataclass(frozen=True)
class CandidateScore:
    index: int
    density: float
    n: int
    r: float | None
    trials_used: int


@dataclass(frozen=True)
class SelectionResult:
    weights: PolicyWeights
    n: int
    median_r: float
    group: tuple[float, int]
    scores: list[CandidateScore]


def _repair_count(delayed, sched, scn, time_limit):
    try:
        ip, cat = build_repair_ip(delayed, sched, decision_day=scn.decision_day)
    except InfeasibleModelError:
        return None
    res = solve(ip, time_limit=time_limit)
    if not res.has_solution or res.timed_out:
        return None
    return count_disruptions(sched, decode(cat, res))


def select_model(
    profile: DatasetProfile,
    candidates: list[tuple[PolicyWeights, int]],
    trials: int = 20,
    master_seed: int = 0,
    fraction_delayed: float = 0.5,
    instance_density: float = 1.0,
    time_limit: float = 60.0,
) -> SelectionResult:
    """Score candidates on shared 50%-delay trials and return the argmin
    combination by median r."""
    if not candidates:
        raise CrewSchedError("need at least one candidate")

    # Shared per-trial material: instance, delays, baseline disruptions.
    bank = []
    for t in range(trials):
        inst = generate_instance(
            profile,
            GeneratorConfig(
                density=instance_density,
                weeks=1,
                seed=stream_seed(master_seed, "select-instance", t),
            ),
        )
        scn = DelayScenario(
            fraction_delayed=fraction_delayed,
            seed=stream_seed(master_seed, "select-delays", t),
        )
        ctx = TrialContext(time_limit=time_limit)
        base_sched, _, reason = _build_schedule(BASELINE, inst, ctx)
        if base_sched is None:
            continue
        delayed = apply_delays(inst, scn)
        base_disruptions = _repair_count(delayed, base_sched, scn, time_limit)
        if base_disruptions is None:
            continue
        bank.append((inst, delayed, scn, base_disruptions))

    if not bank:
        raise CrewSchedError("every selection trial was infeasible")

    scores: list[CandidateScore] = []
    for idx, (weights, n) in enumerate(candidates):
        density = float(weights.metadata.get("density", 1.0))
        nice_vals: list[float] = []
        base_vals: list[float] = []
        for inst, delayed, scn, base_disruptions in bank:
            ctx = TrialContext(
                weights=weights,
                extraction_n=n,
                extraction_seed=stream_seed(master_seed, "select-extract", idx),
                time_limit=time_limit,
            )
            sched, _, reason = _build_schedule(NICE, inst, ctx)
            if sched is None:
                continue
            disruptions = _repair_count(delayed, sched, scn, time_limit)
            if disruptions is None:
                continue
            nice_vals.append(float(disruptions))
            base_vals.append(float(base_disruptions))
        if not nice_vals or sum(base_vals) == 0.0:
            scores.append(CandidateScore(idx, density, n, None, len(nice_vals)))
            continue
        r = (sum(nice_vals) / len(nice_vals)) / (sum(base_vals) / len(base_vals))
        scores.append(CandidateScore(idx, density, n, r, len(nice_vals)))

    groups: dict[tuple[float, int], list[CandidateScore]] = {}
    for score in scores:
        if score.r is None:
            continue
        groups.setdefault((score.density, score.n), []).append(score)
    if not groups:
        raise CrewSchedError("no candidate produced a defined ratio (baseline mean 0?)")

    group_medians = {key: median(s.r for s in group) for key, group in groups.items()}
    best_key = min(group_medians, key=lambda k: (group_medians[k], k))
    best_median = group_medians[best_key]
    winner = min(
        groups[best_key], key=lambda s: (abs(s.r - best_median), s.index)
    )
    return SelectionResult(
        weights=candidates[winner.index][0],
        n=winner.n,
        median_r=best_median,
        group=best_key,
        scores=scores,
    )
