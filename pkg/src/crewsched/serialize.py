"""One canonical on-disk format for every artifact the toolkit produces.

Artifacts are JSON documents with two mandatory header fields: format_version
(currently 1) and kind. Field names mirror the in-memory dataclasses so files
stay greppable. Writers emit sorted keys with a trailing newline, so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .domain import Flight, Pilot, Schedule, ScheduleInstance, Slot
from .errors import FormatError

FORMAT_VERSION = 1


def dumps(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_artifact(path: str | Path, payload: dict[str, Any]) -> None:
    Path(path).write_text(dumps(payload), encoding="utf-8")


def read_artifact(path: str | Path, expected_kind: str) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: cannot read artifact ({exc})") from exc
    if not isinstance(payload, dict):
        raise FormatError(f"{path}: artifact must be a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version!r}")
    kind = payload.get("kind")
    if kind != expected_kind:
        raise FormatError(f"{path}: expected kind {expected_kind!r}, found {kind!r}")
    return payload


def header(kind: str) -> dict[str, Any]:
    return {"format_version": FORMAT_VERSION, "kind": kind}


# -- instances ---------------------------------------------------------------

def instance_to_payload(inst: ScheduleInstance) -> dict[str, Any]:
    payload = header("instance")
    payload.update(
        {
            "pilots": [
                {
                    "id": p.id,
                    "qualifications": sorted(p.qualifications),
                    "leave": [list(iv) for iv in p.leave],
                }
                for p in inst.pilots
            ],
            "flights": [
                {
                    "id": f.id,
                    "kind": f.kind,
                    "flight_type": f.flight_type,
                    "start_day": f.start_day,
                    "end_day": f.end_day,
                    "slots": list(f.slots),
                }
                for f in inst.flights
            ],
            "slots": [
                {
                    "id": s.id,
                    "flight_id": s.flight_id,
                    "required_qualification": s.required_qualification,
                }
                for s in inst.slots
            ],
            "horizon_days": inst.horizon_days,
            "num_flight_types": inst.num_flight_types,
            "training_matrix": [list(row) for row in inst.training_matrix],
            "trq_flags": [list(pair) for pair in inst.trq_flags],
            "slots_per_flight_bounds": list(inst.slots_per_flight_bounds),
        }
    )
    return payload


def instance_from_payload(payload: dict[str, Any]) -> ScheduleInstance:
    try:
        return ScheduleInstance(
            pilots=tuple(
                Pilot(
                    id=p["id"],
                    qualifications=frozenset(p["qualifications"]),
                    leave=tuple(tuple(iv) for iv in p["leave"]),
                )
                for p in payload["pilots"]
            ),
            flights=tuple(
                Flight(
                    id=f["id"],
                    kind=f["kind"],
                    flight_type=f["flight_type"],
                    start_day=f["start_day"],
                    end_day=f["end_day"],
                    slots=tuple(f["slots"]),
                )
                for f in payload["flights"]
            ),
            slots=tuple(
                Slot(
                    id=s["id"],
                    flight_id=s["flight_id"],
                    required_qualification=s["required_qualification"],
                )
                for s in payload["slots"]
            ),
            horizon_days=payload["horizon_days"],
            num_flight_types=payload["num_flight_types"],
            training_matrix=tuple(tuple(row) for row in payload["training_matrix"]),
            trq_flags=tuple((bool(a), bool(b)) for a, b in payload["trq_flags"]),
            slots_per_flight_bounds=tuple(payload["slots_per_flight_bounds"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed instance payload: {exc}") from exc


def save_instance(path: str | Path, inst: ScheduleInstance) -> None:
    write_artifact(path, instance_to_payload(inst))


def load_instance(path: str | Path) -> ScheduleInstance:
    return instance_from_payload(read_artifact(path, "instance"))


# -- schedules ---------------------------------------------------------------

def schedule_to_payload(sched: Schedule) -> dict[str, Any]:
    payload = header("schedule")
    payload["assignment"] = {str(sid): pid for sid, pid in sorted(sched.assignment.items())}
    payload["complete"] = sched.complete
    return payload


def schedule_from_payload(payload: dict[str, Any]) -> Schedule:
    try:
        assignment = {int(sid): int(pid) for sid, pid in payload["assignment"].items()}
        return Schedule(assignment=assignment, complete=bool(payload["complete"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed schedule payload: {exc}") from exc


def save_schedule(path: str | Path, sched: Schedule) -> None:
    write_artifact(path, schedule_to_payload(sched))


def load_schedule(path: str | Path) -> Schedule:
    return schedule_from_payload(read_artifact(path, "schedule"))


# -- dataset profiles ----------------------------------------------------------

def profile_to_payload(profile) -> dict[str, Any]:
    payload = header("profile")
    payload.update(
        {
            "weekly_mission_mean": profile.weekly_mission_mean,
            "weekly_mission_stddev": profile.weekly_mission_stddev,
            "weekly_simulator_mean": profile.weekly_simulator_mean,
            "weekly_simulator_stddev": profile.weekly_simulator_stddev,
            "mission_type_frequencies": {
                str(t): c for t, c in sorted(profile.mission_type_frequencies.items())
            },
            "simulator_type_frequencies": {
                str(t): c for t, c in sorted(profile.simulator_type_frequencies.items())
            },
            "duration_samples": {
                str(t): list(v) for t, v in sorted(profile.duration_samples.items())
            },
            "pilot_roster": [
                {
                    "id": p.id,
                    "qualifications": sorted(p.qualifications),
                    "leave": [list(iv) for iv in p.leave],
                }
                for p in profile.pilot_roster
            ],
            "training_matrix_template": {
                str(t): list(v) for t, v in sorted(profile.training_matrix_template.items())
            },
            "slots_per_flight_type": {
                str(t): list(v) for t, v in sorted(profile.slots_per_flight_type.items())
            },
            "trq_by_type": {str(t): list(v) for t, v in sorted(profile.trq_by_type.items())},
            "slots_per_flight_bounds": list(profile.slots_per_flight_bounds),
        }
    )
    return payload


def profile_from_payload(payload: dict[str, Any]):
    from .generator import DatasetProfile  # deferred to avoid an import cycle

    try:
        return DatasetProfile(
            weekly_mission_mean=payload["weekly_mission_mean"],
            weekly_mission_stddev=payload["weekly_mission_stddev"],
            weekly_simulator_mean=payload["weekly_simulator_mean"],
            weekly_simulator_stddev=payload["weekly_simulator_stddev"],
            mission_type_frequencies={
                int(t): int(c) for t, c in payload["mission_type_frequencies"].items()
            },
            simulator_type_frequencies={
                int(t): int(c) for t, c in payload["simulator_type_frequencies"].items()
            },
            duration_samples={
                int(t): tuple(v) for t, v in payload["duration_samples"].items()
            },
            pilot_roster=tuple(
                Pilot(
                    id=p["id"],
                    qualifications=frozenset(p["qualifications"]),
                    leave=tuple(tuple(iv) for iv in p["leave"]),
                )
                for p in payload["pilot_roster"]
            ),
            training_matrix_template={
                int(t): tuple(v) for t, v in payload["training_matrix_template"].items()
            },
            slots_per_flight_type={
                int(t): tuple(v) for t, v in payload["slots_per_flight_type"].items()
            },
            trq_by_type={
                int(t): (bool(v[0]), bool(v[1])) for t, v in payload["trq_by_type"].items()
            },
            slots_per_flight_bounds=tuple(payload["slots_per_flight_bounds"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed profile payload: {exc}") from exc


def save_profile(path: str | Path, profile) -> None:
    write_artifact(path, profile_to_payload(profile))


def load_profile(path: str | Path):
    return profile_from_payload(read_artifact(path, "profile"))


# -- policy weights ------------------------------------------------------------

def weights_to_payload(weights) -> dict[str, Any]:
    payload = header("policy_weights")
    payload.update(
        {
            "input_dim": weights.input_dim,
            "hidden": list(weights.hidden),
            "num_pilots": weights.num_pilots,
            "params": {k: v.tolist() for k, v in sorted(weights.params.items())},
            "metadata": dict(weights.metadata),
        }
    )
    return payload


def weights_from_payload(payload: dict[str, Any]):
    import numpy as np

    from .rl.net import PolicyWeights

    try:
        return PolicyWeights(
            input_dim=int(payload["input_dim"]),
            hidden=tuple(payload["hidden"]),
            num_pilots=int(payload["num_pilots"]),
            params={k: np.asarray(v, dtype=float) for k, v in payload["params"].items()},
            metadata=dict(payload["metadata"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed weights payload: {exc}") from exc


def save_weights(path: str | Path, weights) -> None:
    write_artifact(path, weights_to_payload(weights))


def load_weights(path: str | Path):
    return weights_from_payload(read_artifact(path, "policy_weights"))


# -- coefficient matrices --------------------------------------------------------

def coefficients_to_payload(matrix) -> dict[str, Any]:
    payload = header("coefficients")
    payload.update(
        {
            "method": matrix.method,
            "n": matrix.n,
            "entries": [
                [pid, sid, value] for (pid, sid), value in sorted(matrix.values.items())
            ],
            "metadata": {k: v for k, v in sorted(matrix.metadata.items())},
        }
    )
    return payload


def coefficients_from_payload(payload: dict[str, Any]):
    from .extraction import CoefficientMatrix

    try:
        return CoefficientMatrix(
            values={(int(p), int(s)): float(v) for p, s, v in payload["entries"]},
            method=payload["method"],
            n=int(payload["n"]),
            metadata=dict(payload["metadata"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed coefficients payload: {exc}") from exc


def save_coefficients(path: str | Path, matrix) -> None:
    write_artifact(path, coefficients_to_payload(matrix))


def load_coefficients(path: str | Path):
    return coefficients_from_payload(read_artifact(path, "coefficients"))
