"""JSON interchange for instances and schedules."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from .model import Instance, NightPlan, Observation, PlacedObservation, Schedule


class InstanceFormatError(ValueError):
    pass


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "nights": instance.nights,
        "probabilities": list(instance.probabilities),
        "observations": [
            {"id": o.id, "release": o.release, "deadline": o.deadline,
             "processing": o.processing, "gain": o.gain}
            for o in instance.observations
        ],
    }
    if instance.p_clear is not None:
        doc["p_clear"] = instance.p_clear
    return doc


def instance_from_dict(doc: dict[str, Any]) -> Instance:
    try:
        observations = tuple(
            Observation(str(o["id"]), int(o["release"]), int(o["deadline"]),
                        int(o["processing"]), int(o["gain"]))
            for o in doc["observations"]
        )
        p_clear = doc.get("p_clear")
        return Instance(
            nights=int(doc["nights"]),
            observations=observations,
            probabilities=tuple(float(p) for p in doc["probabilities"]),
            p_clear=None if p_clear is None else float(p_clear),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed instance document: {exc}") from exc


def schedule_to_dict(schedule: Schedule) -> dict[str, Any]:
    return {"nights": [[{"id": p.observation_id, "start": p.start} for p in plan.placements]
                       for plan in schedule.nights]}


def schedule_from_dict(doc: dict[str, Any]) -> Schedule:
    try:
        return Schedule(tuple(
            NightPlan(tuple(PlacedObservation(str(p["id"]), int(p["start"])) for p in night))
            for night in doc["nights"]
        ))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed schedule document: {exc}") from exc


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=False) + "\n"


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"{path}: {exc}") from exc
    return instance_from_dict(doc)


def save_instance(instance: Instance, path: str | os.PathLike) -> None:
    write_atomic(path, dumps_instance(instance))


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
