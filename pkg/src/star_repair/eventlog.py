"""Append-only per-session event logs and deterministic replay.

Each session writes one newline-delimited JSON file: a "created" record
snapshotting the cluster, then one record per advance() event. Replay
rebuilds the session by re-running the same pure planning functions, so a
replayed session equals the live one bit-for-bit in state and plan; this
doubles as the crash-recovery path.

Revision plans are not stored: the "revision_ready" record only marks the
revision and the plan is recomputed from the logged exclusions, which is
sound because planning is deterministic.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from star_repair.cloud import PointCloud
from star_repair.config import params_from_dict, params_to_dict
from star_repair.coverage import PlannerParams, plan_cluster, replan_after_exclusion
from star_repair.detection import make_cluster
from star_repair.exclusion import ExclusionSet
from star_repair.geom import Point3
from star_repair.messages import from_exclusion_volume, to_exclusion_volume, VolumeSpec
from star_repair.navgrid import GoalPose
from star_repair.session import (
    DecisionMade,
    DecisionValue,
    DetectionReady,
    Event,
    ExclusionSubmitted,
    ExecutionDone,
    NavigationDone,
    ReviewSession,
    RevisionConfirmed,
    RevisionReady,
    advance,
    new_session,
)


class SessionLogWriter:
    """Appends one session's records to disk, flushing every line."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict) -> None:
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def created_record(
    session: ReviewSession, image_uri: str, timestamp: float, params: PlannerParams
) -> dict:
    cluster = session.cluster
    record = {
        "kind": "created",
        "ts": timestamp,
        "session_id": session.session_id,
        "cluster_id": cluster.id,
        "image_uri": image_uri,
        "params": params_to_dict(params),
        "points": cluster.cloud.points.tolist(),
    }
    if cluster.cloud.colors is not None:
        record["colors"] = cluster.cloud.colors.tolist()
    if session.goal is not None:
        record["goal"] = {
            "position": list(session.goal.position.as_tuple()),
            "yaw": session.goal.yaw,
        }
    return record


def event_record(event: Event, timestamp: float) -> dict:
    record: dict = {"kind": "event", "ts": timestamp, "name": event.name}
    if isinstance(event, DecisionMade):
        record["value"] = event.value.value
    elif isinstance(event, ExclusionSubmitted):
        record["volumes"] = [
            {
                "shape": spec.shape,
                "position": list(spec.position),
                "orientation": list(spec.orientation),
                "dims": list(spec.dims),
            }
            for spec in map(from_exclusion_volume, event.exclusions.volumes)
        ]
    elif isinstance(event, RevisionReady):
        # fixture_count is a replay cross-check; the plan itself is recomputed
        record["fixture_count"] = len(event.plan.fixtures)
    return record


def _event_from_record(record: dict, session: ReviewSession, params: PlannerParams) -> Event:
    name = record["name"]
    if name == "detection_ready":
        return DetectionReady()
    if name == "decision":
        return DecisionMade(DecisionValue(record["value"]))
    if name == "exclusions":
        volumes = tuple(
            to_exclusion_volume(
                VolumeSpec(
                    v["shape"],
                    tuple(v["position"]),
                    tuple(v["orientation"]),
                    tuple(v["dims"]),
                )
            )
            for v in record["volumes"]
        )
        return ExclusionSubmitted(ExclusionSet(session.cluster.id, volumes))
    if name == "revision_ready":
        plan, retained = replan_after_exclusion(session.cluster, session.exclusions, params)
        return RevisionReady(plan, retained)
    if name == "revision_confirmed":
        return RevisionConfirmed()
    if name == "navigation_done":
        return NavigationDone()
    if name == "execution_done":
        return ExecutionDone()
    raise ValueError(f"unknown event record {name!r}")


def replay_session(
    path: Path, params: Optional[PlannerParams] = None
) -> ReviewSession:
    """Rebuild a session from its log; final state and plan match the live run.

    Planner params stored in the created record take precedence, so logs
    replay correctly even when the scenario config has moved on.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"empty session log {path}")
    created = json.loads(lines[0])
    if created.get("kind") != "created":
        raise ValueError(f"session log {path} does not start with a created record")
    if "params" in created:
        params = params_from_dict(created["params"])
    elif params is None:
        raise ValueError(f"session log {path} has no planner params")
    points = np.asarray(created["points"], dtype=np.float64).reshape(-1, 3)
    colors = np.asarray(created["colors"], dtype=np.int64) if "colors" in created else None
    cluster = make_cluster(created["cluster_id"], PointCloud(points, colors))
    goal: Optional[GoalPose] = None
    if "goal" in created:
        goal = GoalPose(
            Point3(*created["goal"]["position"]),
            created["goal"]["yaw"],
            cluster.id,
        )
    session = new_session(
        created["session_id"], cluster, plan_cluster(cluster, params), goal
    )
    for line in lines[1:]:
        record = json.loads(line)
        if record.get("kind") != "event":
            continue
        event = _event_from_record(record, session, params)
        session = advance(session, event, record["ts"])
    return session


def stored_params(path: Path) -> Optional[PlannerParams]:
    """Planner params snapshotted in a log's created record, if any."""
    with open(path, encoding="utf-8") as fh:
        created = json.loads(fh.readline())
    if created.get("kind") == "created" and "params" in created:
        return params_from_dict(created["params"])
    return None


def session_log_path(log_dir: Path, session_id: int) -> Path:
    return Path(log_dir) / f"session_{session_id}.ndjson"


def list_session_logs(log_dir: Path) -> list[Path]:
    log_dir = Path(log_dir)
    if not log_dir.is_dir():
        return []
    return sorted(log_dir.glob("session_*.ndjson"), key=lambda p: p.name)
