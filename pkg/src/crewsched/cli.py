"""Command-line interface.

Subcommands: gen (profile -> instance), train (profile -> weights), extract
(weights + instance -> coefficients), schedule (instance + method ->
schedule), disrupt (schedule + scenario -> disruption stats), experiment
(config -> full report), selftest (built-in oracle suites). Exit codes: 0 on
success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__, serialize
from .disruption import (
    ALL_METHODS,
    DelayScenario,
    TrialContext,
    _build_schedule,
    apply_delays,
    count_disruptions,
)
from .errors import CrewSchedError
from .experiment import ExperimentConfig, format_report_table, run_experiment
from .extraction import extract
from .formulations import build_repair_ip, decode
from .generator import GeneratorConfig, default_desk_profile, generate_instance
from .rl.ppo import TrainConfig, train_ppo
from .seeding import stream_seed
from .solver import solve


def _profile_from_arg(path: str | None):
    if path is None or path == "desk":
        return default_desk_profile()
    return serialize.load_profile(path)


def _cmd_gen(args) -> int:
    profile = _profile_from_arg(args.profile)
    inst = generate_instance(
        profile, GeneratorConfig(density=args.density, weeks=args.weeks, seed=args.seed)
    )
    serialize.save_instance(args.out, inst)
    print(f"wrote {args.out}: {len(inst.flights)} flights, {len(inst.slots)} slots")
    return 0


def _cmd_train(args) -> int:
    profile = _profile_from_arg(args.profile)
    # Tuned for these short episodes; see TrainConfig for the generic defaults.
    cfg = TrainConfig(
        density=args.density,
        seed=args.seed,
        total_steps=args.steps,
        reward_variant=args.reward,
        t_move=args.t_move,
        gamma=1.0,
        entropy_coef=0.003,
    )
    weights, log = train_ppo(profile, cfg)
    serialize.save_weights(args.out, weights)
    if args.log:
        from .experiment import write_training_log

        write_training_log(Path(args.log), log)
    final = log[-1]
    print(
        f"wrote {args.out}: {args.steps} steps, "
        f"completion {final['completion_rate']:.3f}, return {final['mean_return']:.1f}"
    )
    return 0


def _cmd_extract(args) -> int:
    weights = serialize.load_weights(args.weights)
    inst = serialize.load_instance(args.instance)
    matrix = extract(weights, inst, args.n, seed=args.seed)
    serialize.save_coefficients(args.out, matrix)
    print(f"wrote {args.out}: {len(matrix.values)} coefficients ({matrix.method})")
    return 0


def _cmd_schedule(args) -> int:
    inst = serialize.load_instance(args.instance)
    weights = serialize.load_weights(args.weights) if args.weights else None
    ctx = TrialContext(
        weights=weights,
        extraction_n=args.n,
        extraction_seed=args.seed,
        t_buffer=args.t_buffer,
        t_move=args.t_move,
        time_limit=args.time_limit_secs,
    )
    sched, seconds, reason = _build_schedule(args.method, inst, ctx)
    if sched is None:
        raise CrewSchedError(f"{args.method} produced no schedule ({reason})")
    serialize.save_schedule(args.out, sched)
    print(
        f"wrote {args.out}: method={args.method} complete={sched.complete} "
        f"build_time={seconds:.3f}s"
    )
    return 0


def _cmd_disrupt(args) -> int:
    inst = serialize.load_instance(args.instance)
    sched = serialize.load_schedule(args.schedule)
    rows = []
    for trial in range(args.trials):
        scn = DelayScenario(
            fraction_delayed=args.fraction_delayed,
            decision_day=args.decision_day,
            seed=stream_seed(args.seed, "disrupt", trial),
        )
        delayed = apply_delays(inst, scn)
        ip, cat = build_repair_ip(delayed, sched, decision_day=scn.decision_day)
        res = solve(ip, time_limit=args.time_limit_secs)
        if not res.has_solution:
            rows.append((trial, "", 1, res.status))
            continue
        repaired = decode(cat, res)
        rows.append((trial, count_disruptions(sched, repaired), 0, ""))
    if args.out:
        with open(args.out, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(("trial", "disruptions", "skipped", "skip_reason"))
            writer.writerows(rows)
    counted = [r[1] for r in rows if r[2] == 0]
    mean = sum(counted) / len(counted) if counted else float("nan")
    print(
        f"trials={args.trials} mean_disruptions={mean:.3f} "
        f"skipped={sum(r[2] for r in rows)}"
    )
    return 0


def _cmd_experiment(args) -> int:
    if args.config:
        payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
        payload.setdefault("out_dir", args.out or "experiment-out")
        if args.out:
            payload["out_dir"] = args.out
        cfg = ExperimentConfig.from_payload(payload)
    else:
        if not args.out:
            raise CrewSchedError("--out is required without --config")
        cfg = ExperimentConfig(
            out_dir=args.out,
            profile_path=None if args.profile in (None, "desk") else args.profile,
            density=args.density,
            fractions=tuple(args.fraction_delayed),
            trials=args.trials,
            methods=tuple(args.method),
            t_buffer=args.t_buffer,
            t_move=args.t_move,
            time_limit=args.time_limit_secs,
            seed=args.seed,
            extraction_n=args.n,
            weights_path=args.weights,
            train_steps=args.train_steps,
            jobs=args.jobs,
        )
    reports = run_experiment(cfg)
    print(format_report_table(reports), end="")
    print(f"artifacts in {cfg.out_dir}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(verbose=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crewsched",
        description="Crew scheduling: integer programming with policy-derived objectives",
    )
    parser.add_argument("--version", action="version", version=f"crewsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance from a profile")
    p.add_argument("--profile", default="desk", help="profile file or 'desk' (bundled)")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--weeks", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a scheduling policy")
    p.add_argument("--profile", default="desk")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=3_072_000)
    p.add_argument("--reward", choices=("buffer", "moveup"), default="buffer")
    p.add_argument("--t-move", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="optional training-log CSV path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("extract", help="extract objective coefficients from a policy")
    p.add_argument("--weights", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--n", type=int, default=2, help="rollouts; 0 = blank slate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("schedule", help="build a schedule with one method")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=ALL_METHODS, default="baseline")
    p.add_argument("--weights", help="policy weights (nice/rl methods)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-buffer", type=int, default=4)
    p.add_argument("--t-move", type=int, default=2)
    p.add_argument("--time-limit-secs", type=float, default=60.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("disrupt", help="delay flights and repair a schedule")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--fraction-delayed", type=float, default=0.5)
    p.add_argument("--decision-day", type=int, default=1)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit-secs", type=float, default=60.0)
    p.add_argument("--out", help="optional per-trial CSV")
    p.set_defaults(func=_cmd_disrupt)

    p = sub.add_parser("experiment", help="run the full disruption comparison")
    p.add_argument("--config", help="JSON config (mirrors the flags)")
    p.add_argument("--profile", default="desk")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument(
        "--fraction-delayed", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0]
    )
    p.add_argument("--method", nargs="+", default=["baseline", "buffer", "nice", "rl"])
    p.add_argument("--t-buffer", type=int, default=4)
    p.add_argument("--t-move", type=int, default=2)
    p.add_argument("--time-limit-secs", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--weights", help="pre-trained weights (skips training)")
    p.add_argument("--train-steps", type=int, default=3_072_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("selftest", help="run built-in oracle suites")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CrewSchedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
