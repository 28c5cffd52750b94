"""Delay simulation, minimum-change repair, disruption counting, statistics.

A trial builds one schedule per method on the same instance, applies one
shared delay realization, repairs every surviving schedule with the
minimum-change program, and counts changed slots. Methods drop out of a
trial independently: the whole trial is skipped when the shared constraint
core is infeasible, the direct-policy method alone is skipped when its
rollout dead-ends, and a solver timeout skips just the method that timed
out. Statistics are computed over non-skipped trials only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .domain import Flight, Schedule, ScheduleInstance
from .errors import CrewSchedError, DegenerateSamplesError, InfeasibleModelError, SolverCapacityError
from .extraction import extract
from .formulations import (
    build_baseline_ip,
    build_buffer_ip,
    build_moveup_ip,
    build_nice_ip,
    build_repair_ip,
    decode,
)
from .rl.net import PolicyWeights
from .rl.schedule import GREEDY, rl_schedule
from .solver import solve
from .stats import paired_t_test, welch_t_test

BASELINE = "baseline"
BUFFER = "buffer"
MOVEUP = "moveup"
NICE = "nice"
RL = "rl"
ALL_METHODS = (BASELINE, BUFFER, MOVEUP, NICE, RL)
IP_METHODS = (BASELINE, BUFFER, MOVEUP, NICE)


@dataclass(frozen=True)
class DelayScenario:
    fraction_delayed: float
    decision_day: int = 1
    delay_min: int = 1
    delay_max: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction_delayed <= 1.0:
            raise ValueError("fraction_delayed must be in (0, 1]")
        if self.delay_min < 1 or self.delay_max < self.delay_min:
            raise ValueError("delay bounds must be positive and ordered")


@dataclass(frozen=True)
class TrialResult:
    method: str
    disruptions: int | None
    build_time: float
    skipped: bool
    skip_reason: str = ""


@dataclass(frozen=True)
class TrialContext:
    """Everything run_trial needs beyond the instance and scenario."""

    weights: PolicyWeights | None = None
    extraction_n: int = 2
    extraction_seed: int = 0
    t_buffer: int = 4
    t_move: int = 2
    time_limit: float = 60.0


def apply_delays(inst: ScheduleInstance, scn: DelayScenario) -> ScheduleInstance:
    """Shift a random fraction of the not-yet-departed flights by 1-3 days.

    Departed means start_day < decision_day. The delayed-flight count is the
    fraction rounded half-up; each selected flight gets an independent
    uniform shift, preserving its duration.
    """
    rng = np.random.default_rng(scn.seed)
    eligible = [f.id for f in inst.flights if f.start_day >= scn.decision_day]
    count = int(np.floor(scn.fraction_delayed * len(eligible) + 0.5))
    if count == 0 or not eligible:
        return inst
    chosen = sorted(int(i) for i in rng.choice(eligible, size=count, replace=False))
    shifts = {fid: int(rng.integers(scn.delay_min, scn.delay_max + 1)) for fid in chosen}
    flights = []
    max_end = 0
    for f in inst.flights:
        if f.id in shifts:
            d = shifts[f.id]
            f = Flight(f.id, f.kind, f.flight_type, f.start_day + d, f.end_day + d, f.slots)
        flights.append(f)
        max_end = max(max_end, f.end_day)
    return replace(
        inst,
        flights=tuple(flights),
        horizon_days=max(inst.horizon_days, max_end + 1),
    )


def count_disruptions(original: Schedule, repaired: Schedule) -> int:
    """Slots whose assigned pilot changed (Hamming distance)."""
    if not original.complete or not repaired.complete:
        raise CrewSchedError("disruption count needs two complete schedules")
    if set(original.assignment) != set(repaired.assignment):
        raise CrewSchedError("schedules cover different slot sets")
    return sum(
        1 for sid, pid in original.assignment.items() if repaired.assignment[sid] != pid
    )


def _build_schedule(
    method: str, inst: ScheduleInstance, ctx: TrialContext
) -> tuple[Schedule | None, float, str]:
    """Returns (schedule, build_seconds, failure_reason)."""
    start = time.monotonic()
    try:
        if method == RL:
            if ctx.weights is None:
                raise CrewSchedError("rl method needs trained weights")
            sched = rl_schedule(ctx.weights, inst, mode=GREEDY)
            if not sched.complete:
                return None, time.monotonic() - start, "incomplete"
            return sched, time.monotonic() - start, ""
        if method == BASELINE:
            ip, cat = build_baseline_ip(inst)
        elif method == BUFFER:
            ip, cat = build_buffer_ip(inst, ctx.t_buffer)
        elif method == MOVEUP:
            ip, cat = build_moveup_ip(inst, ctx.t_move)
        elif method == NICE:
            if ctx.weights is None:
                raise CrewSchedError("nice method needs trained weights")
            coeffs = extract(ctx.weights, inst, ctx.extraction_n, seed=ctx.extraction_seed)
            ip, cat = build_nice_ip(inst, coeffs)
        else:
            raise CrewSchedError(f"unknown method {method!r}")
    except InfeasibleModelError:
        return None, time.monotonic() - start, "infeasible"
    except SolverCapacityError:
        return None, time.monotonic() - start, "capacity"

    result = solve(ip, time_limit=ctx.time_limit)
    elapsed = time.monotonic() - start
    if result.status == "infeasible":
        return None, elapsed, "infeasible"
    if result.timed_out or not result.has_solution:
        return None, elapsed, "timeout"
    return decode(cat, result), elapsed, ""


def run_trial(
    methods: list[str],
    inst: ScheduleInstance,
    scn: DelayScenario,
    ctx: TrialContext,
) -> list[TrialResult]:
    """One full build/delay/repair trial over the given methods."""
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise CrewSchedError(f"unknown methods {sorted(unknown)}")

    schedules: dict[str, Schedule] = {}
    build_times: dict[str, float] = {}
    reasons: dict[str, str] = {}
    for method in methods:
        sched, seconds, reason = _build_schedule(method, inst, ctx)
        build_times[method] = seconds
        if sched is None:
            reasons[method] = reason
        else:
            schedules[method] = sched

    # The IP-family constraint cores are identical, so infeasibility for one
    # is infeasibility for all; skip the whole trial.
    if any(reasons.get(m) == "infeasible" for m in methods if m in IP_METHODS):
        return [
            TrialResult(m, None, build_times[m], True, "infeasible") for m in methods
        ]

    delayed = apply_delays(inst, scn)
    results = []
    for method in methods:
        if method not in schedules:
            results.append(TrialResult(method, None, build_times[method], True, reasons[method]))
            continue
        sched = schedules[method]
        try:
            ip, cat = build_repair_ip(delayed, sched, decision_day=scn.decision_day)
        except InfeasibleModelError:
            results.append(
                TrialResult(method, None, build_times[method], True, "repair-infeasible")
            )
            continue
        repair_res = solve(ip, time_limit=ctx.time_limit)
        if repair_res.status == "infeasible":
            results.append(
                TrialResult(method, None, build_times[method], True, "repair-infeasible")
            )
            continue
        if repair_res.timed_out or not repair_res.has_solution:
            results.append(
                TrialResult(method, None, build_times[method], True, "repair-timeout")
            )
            continue
        repaired = decode(cat, repair_res)
        disruptions = count_disruptions(sched, repaired)
        results.append(TrialResult(method, disruptions, build_times[method], False))
    return results


@dataclass(frozen=True)
class MethodStats:
    mean: float | None
    stddev: float | None
    count: int
    skipped: int
    mean_build_time: float
    median_build_time: float


@dataclass(frozen=True)
class DisruptionReport:
    fraction_delayed: float
    trials: int
    methods: dict[str, MethodStats]
    paired_p: dict[str, float | None] = field(default_factory=dict)
    welch_p: dict[str, float | None] = field(default_factory=dict)
    ratio_vs_baseline: dict[str, float | None] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_payload(self) -> dict[str, Any]:
        return {
            "fraction_delayed": self.fraction_delayed,
            "trials": self.trials,
            "methods": {
                m: {
                    "mean": s.mean,
                    "stddev": s.stddev,
                    "count": s.count,
                    "skipped": s.skipped,
                    "mean_build_time": s.mean_build_time,
                    "median_build_time": s.median_build_time,
                }
                for m, s in sorted(self.methods.items())
            },
            "paired_p": dict(sorted(self.paired_p.items())),
            "welch_p": dict(sorted(self.welch_p.items())),
            "ratio_vs_baseline": dict(sorted(self.ratio_vs_baseline.items())),
            "notes": list(self.notes),
        }


def summarize_trials(
    fraction_delayed: float, per_trial: list[list[TrialResult]]
) -> DisruptionReport:
    """Aggregate trial results into the per-scenario report.

    The paired test compares the coefficient-weighted schedule against the
    baseline on trials where both ran; Welch's test covers comparisons with
    the direct-policy method, whose trials drop out independently.
    """
    by_method: dict[str, list[TrialResult]] = {}
    for trial in per_trial:
        for res in trial:
            by_method.setdefault(res.method, []).append(res)

    methods: dict[str, MethodStats] = {}
    samples: dict[str, list[float]] = {}
    for method, results in by_method.items():
        vals = [float(r.disruptions) for r in results if not r.skipped]
        times = sorted(r.build_time for r in results)
        samples[method] = vals
        methods[method] = MethodStats(
            mean=float(np.mean(vals)) if vals else None,
            stddev=float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
            count=len(vals),
            skipped=len(results) - len(vals),
            mean_build_time=float(np.mean(times)) if times else 0.0,
            median_build_time=float(np.median(times)) if times else 0.0,
        )

    notes: list[str] = []
    paired_p: dict[str, float | None] = {}
    welch_p: dict[str, float | None] = {}
    if NICE in by_method and BASELINE in by_method:
        pairs = [
            (a.disruptions, b.disruptions)
            for trial in per_trial
            for a in [next(r for r in trial if r.method == NICE)]
            for b in [next(r for r in trial if r.method == BASELINE)]
            if not a.skipped and not b.skipped
        ]
        key = f"{NICE}_vs_{BASELINE}"
        try:
            paired_p[key] = paired_t_test([p[0] for p in pairs], [p[1] for p in pairs])
        except DegenerateSamplesError as exc:
            paired_p[key] = None
            notes.append(f"paired test degenerate ({exc})")
    if NICE in samples and RL in samples:
        key = f"{NICE}_vs_{RL}"
        try:
            welch_p[key] = welch_t_test(samples[NICE], samples[RL])
        except DegenerateSamplesError as exc:
            welch_p[key] = None
            notes.append(f"welch test degenerate ({exc})")

    ratios: dict[str, float | None] = {}
    base = methods.get(BASELINE)
    if base is not None and base.mean is not None:
        for method, stats_ in methods.items():
            if method == BASELINE or stats_.mean is None:
                continue
            if base.mean == 0.0:
                ratios[method] = None
                notes.append(f"ratio undefined for {method}: baseline mean is 0")
            else:
                ratios[method] = stats_.mean / base.mean

    return DisruptionReport(
        fraction_delayed=fraction_delayed,
        trials=len(per_trial),
        methods=methods,
        paired_p=paired_p,
        welch_p=welch_p,
        ratio_vs_baseline=ratios,
        notes=notes,
    )
