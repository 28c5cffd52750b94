"""Canned experiment pipelines: train, schedule, disrupt, aggregate, report.

run_experiment executes the full disruption comparison for each configured
delay fraction: per trial it generates an instance, builds one schedule per
method, applies a shared delay realization, repairs, and counts disruptions.
Artifacts written to the output directory: trained weights (when training
ran), a training log, per-trial CSV rows, a per-fraction JSON/text report,
and a manifest from which the whole run can be reproduced.

All randomness derives from the single master seed via named streams, so a
manifest rerun reproduces every deterministic CSV column; build_time_ms is
wall-clock and varies run to run.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__, serialize
from .disruption import (
    ALL_METHODS,
    DelayScenario,
    DisruptionReport,
    TrialContext,
    TrialResult,
    run_trial,
    summarize_trials,
)
from .errors import CrewSchedError
from .generator import DatasetProfile, GeneratorConfig, default_desk_profile, generate_instance
from .rl.net import PolicyWeights
from .rl.ppo import TrainConfig, train_ppo
from .seeding import stream_seed

TRIAL_CSV_COLUMNS = (
    "fraction_delayed",
    "trial",
    "method",
    "disruptions",
    "build_time_ms",
    "skipped",
    "skip_reason",
)
# Columns that must reproduce exactly when re-running from a manifest.
DETERMINISTIC_CSV_COLUMNS = (
    "fraction_delayed",
    "trial",
    "method",
    "disruptions",
    "skipped",
    "skip_reason",
)


@dataclass(frozen=True)
class ExperimentConfig:
    out_dir: str
    profile_path: str | None = None  # bundled desk profile when None
    density: float = 1.0
    fractions: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    trials: int = 100
    methods: tuple[str, ...] = ("baseline", "buffer", "nice", "rl")
    t_buffer: int = 4
    t_move: int = 2
    time_limit: float = 60.0
    seed: int = 0
    extraction_n: int = 2
    weights_path: str | None = None
    train_steps: int = 3_072_000
    train_density: float | None = None  # defaults to the experiment density
    reward_variant: str = "buffer"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise CrewSchedError("trials must be >= 1")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise CrewSchedError(f"unknown methods {sorted(unknown)}")
        if not self.fractions:
            raise CrewSchedError("need at least one fraction_delayed value")

    def to_payload(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["fractions"] = list(self.fractions)
        payload["methods"] = list(self.methods)
        return payload

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "ExperimentConfig":
        data = dict(payload)
        data["fractions"] = tuple(data.get("fractions", (0.25, 0.5, 0.75, 1.0)))
        data["methods"] = tuple(data.get("methods", ("baseline", "buffer", "nice", "rl")))
        return cls(**data)


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.to_payload(), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _load_profile(cfg: ExperimentConfig) -> DatasetProfile:
    if cfg.profile_path is None:
        return default_desk_profile()
    return serialize.load_profile(cfg.profile_path)


def ensure_weights(
    cfg: ExperimentConfig, profile: DatasetProfile, out: Path
) -> tuple[PolicyWeights, list[dict] | None]:
    """Load pre-trained weights or train fresh ones (saved alongside a log)."""
    if cfg.weights_path is not None:
        return serialize.load_weights(cfg.weights_path), None
    # Undiscounted returns with a light entropy bonus train markedly more
    # robust policies on these short episodes than the generic defaults.
    train_cfg = TrainConfig(
        density=cfg.train_density if cfg.train_density is not None else cfg.density,
        seed=stream_seed(cfg.seed, "training"),
        total_steps=cfg.train_steps,
        reward_variant=cfg.reward_variant,
        t_move=cfg.t_move,
        gamma=1.0,
        entropy_coef=0.003,
    )
    weights, log = train_ppo(profile, train_cfg)
    serialize.save_weights(out / "weights.json", weights)
    write_training_log(out / "training_log.csv", log)
    return weights, log


def write_training_log(path: Path, log: list[dict]) -> None:
    columns = ("step", "episodes", "mean_return", "completion_rate", "policy_loss", "value_loss", "entropy")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in log:
            writer.writerow([row.get(c, "") for c in columns])


def _one_trial(args) -> tuple[float, int, list[TrialResult]]:
    profile, cfg_payload, weights, fraction, trial = args
    cfg = ExperimentConfig.from_payload(cfg_payload)
    inst = generate_instance(
        profile,
        GeneratorConfig(
            density=cfg.density,
            weeks=1,
            seed=stream_seed(cfg.seed, "instance", fraction, trial),
        ),
    )
    scn = DelayScenario(
        fraction_delayed=fraction,
        seed=stream_seed(cfg.seed, "delays", fraction, trial),
    )
    ctx = TrialContext(
        weights=weights,
        extraction_n=cfg.extraction_n,
        extraction_seed=stream_seed(cfg.seed, "extraction", fraction, trial),
        t_buffer=cfg.t_buffer,
        t_move=cfg.t_move,
        time_limit=cfg.time_limit,
    )
    return fraction, trial, run_trial(list(cfg.methods), inst, scn, ctx)


def run_experiment(cfg: ExperimentConfig) -> list[DisruptionReport]:
    """Execute the configured scenarios and write all artifacts."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = _load_profile(cfg)
    needs_weights = any(m in ("nice", "rl") for m in cfg.methods)
    weights = None
    if needs_weights:
        weights, _ = ensure_weights(cfg, profile, out)

    tasks = [
        (profile, cfg.to_payload(), weights, fraction, trial)
        for fraction in cfg.fractions
        for trial in range(cfg.trials)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(_one_trial, tasks, chunksize=4))
    else:
        outcomes = [_one_trial(t) for t in tasks]
    # Deterministic fold: order rows by (fraction position, trial index).
    order = {f: k for k, f in enumerate(cfg.fractions)}
    outcomes.sort(key=lambda item: (order[item[0]], item[1]))

    csv_path = out / "trials.csv"
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRIAL_CSV_COLUMNS)
        for fraction, trial, results in outcomes:
            for res in results:
                writer.writerow(
                    [
                        fraction,
                        trial,
                        res.method,
                        "" if res.disruptions is None else res.disruptions,
                        round(res.build_time * 1000.0, 3),
                        int(res.skipped),
                        res.skip_reason,
                    ]
                )

    reports = []
    for fraction in cfg.fractions:
        per_trial = [results for f, _, results in outcomes if f == fraction]
        reports.append(summarize_trials(fraction, per_trial))

    report_payload = serialize.header("disruption_report")
    report_payload["config_hash"] = config_hash(cfg)
    report_payload["scenarios"] = [r.to_payload() for r in reports]
    serialize.write_artifact(out / "report.json", report_payload)
    (out / "report.txt").write_text(format_report_table(reports), encoding="utf-8")

    manifest = serialize.header("manifest")
    manifest["config"] = cfg.to_payload()
    manifest["config_hash"] = config_hash(cfg)
    manifest["package_version"] = __version__
    serialize.write_artifact(out / "manifest.json", manifest)
    return reports


def rerun_from_manifest(manifest_path: str | Path, out_dir: str) -> list[DisruptionReport]:
    payload = serialize.read_artifact(manifest_path, "manifest")
    cfg = ExperimentConfig.from_payload({**payload["config"], "out_dir": out_dir})
    return run_experiment(cfg)


def format_report_table(reports: list[DisruptionReport]) -> str:
    """Text table: one row per delay fraction, mean +/- sd per method."""
    methods = sorted({m for r in reports for m in r.methods})
    header = ["% delayed"] + methods + ["p nice-baseline", "p nice-rl"]
    lines = ["  ".join(f"{h:>18s}" for h in header)]
    for rep in reports:
        cells = [f"{rep.fraction_delayed * 100:>17.0f}%"]
        for method in methods:
            stats = rep.methods.get(method)
            if stats is None or stats.mean is None:
                cells.append(f"{'skipped':>18s}")
            else:
                sd = 0.0 if stats.stddev is None else stats.stddev
                cells.append(f"{stats.mean:>10.2f} ± {sd:<5.2f}")
        for key in (f"nice_vs_baseline", f"nice_vs_rl"):
            val = rep.paired_p.get(key) if "baseline" in key else rep.welch_p.get(key)
            cells.append(f"{'-':>18s}" if val is None else f"{val:>18.3g}")
        lines.append("  ".join(cells))
    skip_notes = [n for r in reports for n in r.notes]
    if skip_notes:
        lines.append("")
        lines.extend(f"note: {n}" for n in skip_notes)
    return "\n".join(lines) + "\n"
