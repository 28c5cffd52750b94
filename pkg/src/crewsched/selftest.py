"""Built-in oracle suites runnable without pytest (the `selftest` subcommand).

Three fast checks: the branch-and-bound solver against brute-force
enumeration on small random programs, the reward arithmetic against its
hand-computed values, and actor/critic gradients against central finite
differences.
"""

from __future__ import annotations

import itertools

import numpy as np

from .domain import MISSION, Flight, Pilot, ScheduleInstance, Slot, buffer_days
from .formulations import penalty
from .rl.env import RewardConfig, reset, step
from .rl.net import init_weights, log_prob_grads, value_grads
from .solver import EQ, GE, LE, MAXIMIZE, MINIMIZE, IpInstance, LinearConstraint, solve


def _random_ip(rng: np.random.Generator) -> IpInstance:
    n = int(rng.integers(1, 11))
    m = int(rng.integers(0, 8))
    cons = []
    for _ in range(m):
        k = int(rng.integers(1, n + 1))
        idx = rng.choice(n, size=k, replace=False)
        coeffs = rng.integers(-10, 11, size=k)
        coeffs[coeffs == 0] = 1
        rel = (LE, GE, EQ)[int(rng.integers(0, 3))]
        cons.append(
            LinearConstraint(
                tuple((int(i), float(c)) for i, c in zip(idx, coeffs)),
                rel,
                float(rng.integers(-12, 13)),
            )
        )
    oidx = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
    ocoef = rng.integers(-10, 11, size=len(oidx))
    sense = MAXIMIZE if rng.random() < 0.5 else MINIMIZE
    return IpInstance(
        n, tuple((int(i), float(c)) for i, c in zip(oidx, ocoef)), sense, tuple(cons)
    )


def brute_force_optimum(ip: IpInstance) -> float | None:
    best = None
    for vec in itertools.product((0, 1), repeat=ip.num_vars):
        ok = True
        for con in ip.constraints:
            lhs = sum(int(c) * vec[i] for i, c in con.terms)
            if con.relation == LE and lhs > con.rhs:
                ok = False
            elif con.relation == GE and lhs < con.rhs:
                ok = False
            elif con.relation == EQ and lhs != con.rhs:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        val = sum(c * vec[i] for i, c in ip.objective)
        if best is None:
            best = val
        elif ip.sense == MAXIMIZE:
            best = max(best, val)
        else:
            best = min(best, val)
    return best


def _check_solver(count: int = 120) -> list[str]:
    failures = []
    rng = np.random.default_rng(190_561)
    for k in range(count):
        ip = _random_ip(rng)
        want = brute_force_optimum(ip)
        got = solve(ip, time_limit=30)
        if want is None:
            if got.status != "infeasible":
                failures.append(f"solver[{k}]: expected infeasible, got {got.status}")
        elif got.status != "optimal" or abs(got.objective_value - want) > 1e-9:
            failures.append(f"solver[{k}]: expected {want}, got {got.summary_line()}")
    return failures


def _check_rewards() -> list[str]:
    failures = []
    if buffer_days(1, 5) != 3:
        failures.append("buffer_days(1, 5) != 3")
    if buffer_days(1, 7) != 5:
        failures.append("buffer_days(1, 7) != 5")
    if penalty(0, 4) != -1.0:
        failures.append("penalty(0, 4) != -1")

    pilots = (Pilot(0, frozenset({0})), Pilot(1, frozenset({0})))
    flights = (
        Flight(0, MISSION, 0, 1, 1, (0,)),
        Flight(1, MISSION, 0, 7, 8, (1,)),
    )
    slots = (Slot(0, 0, 0), Slot(1, 1, 0))
    inst = ScheduleInstance(
        pilots, flights, slots, 14, 1,
        ((0, 0), (0, 0)), ((False, False), (False, False)), (1, 3),
    )
    state, _ = reset(inst, RewardConfig(horizon=7))
    state, _, r1, _ = step(state, 0)
    state, _, r2, done = step(state, 0)
    if r1 != 6.0:
        failures.append(f"first-assignment reward {r1} != 6")
    if r2 != 31.0 or not done or not state.complete:
        failures.append(f"buffer-5 + completion reward {r2} != 31")
    return failures


def _check_gradients(trials: int = 5) -> list[str]:
    failures = []
    rng = np.random.default_rng(8)
    P, types = 6, 4
    input_dim = 3 * P + types + 5
    weights = init_weights(input_dim, P, (16, 12), rng)
    eps = 1e-6
    for trial in range(trials):
        obs = rng.normal(size=input_dim)
        mask = (rng.random(P) < 0.7).astype(float)
        if not mask.any():
            mask[0] = 1.0
        obs[:P] = mask
        action = int(rng.choice(np.flatnonzero(mask)))
        for label, func in (
            ("logp", lambda: log_prob_grads(weights, obs, action)),
            ("value", lambda: value_grads(weights, obs)),
        ):
            _, grads = func()
            for key in ("wa", "wv", "w1"):
                arr = weights.params[key]
                flat_idx = int(rng.integers(arr.size))
                idx = np.unravel_index(flat_idx, arr.shape)
                old = arr[idx]
                arr[idx] = old + eps
                up = func()[0]
                arr[idx] = old - eps
                down = func()[0]
                arr[idx] = old
                numeric = (up - down) / (2 * eps)
                rel = abs(grads[key][idx] - numeric) / max(abs(numeric), 1e-4)
                if rel > 1e-4:
                    failures.append(f"grad[{label}/{key}] trial {trial}: rel err {rel:.2e}")
    return failures


def run_selftest(verbose: bool = False) -> int:
    suites = (
        ("solver-vs-enumeration", _check_solver),
        ("reward-arithmetic", _check_rewards),
        ("gradient-vs-finite-differences", _check_gradients),
    )
    total_failures = 0
    for name, check in suites:
        failures = check()
        total_failures += len(failures)
        status = "ok" if not failures else f"FAIL ({len(failures)})"
        if verbose:
            print(f"{name}: {status}")
            for f in failures:
                print(f"  {f}")
    return 1 if total_failures else 0
