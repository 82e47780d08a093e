"""Wire protocol: UTF-8 JSON messages with a top-level "type" discriminator.

Field names are normative; the browser client mirrors them verbatim.
Message dataclasses hold raw wire values (plain floats/tuples), so
decode(encode(m)) == m exactly; conversion to domain objects happens in
to_exclusion_set / from_exclusion_volume.

Decode rules: unknown "type" -> UnknownType; structural problems (missing
field, wrong JSON type) -> MalformedMessage; out-of-range values
(non-positive dims, bad enum token, non-unit orientation) -> SchemaViolation.
Unknown extra fields are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from star_repair.errors import MalformedMessage, SchemaViolation, UnknownType
from star_repair.exclusion import ExclusionSet, ExclusionVolume, Shape
from star_repair.geom import Point3, Pose, UnitQuaternion

CHUNK_POINTS = 4096

_SHAPE_TAGS = {s.value for s in Shape}
_PHASES = ("navigating", "executing", "done")
_DECISIONS = ("repair", "modify", "reject")


@dataclass(frozen=True)
class VolumeSpec:
    """Wire form of one exclusion volume."""

    shape: str
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    dims: tuple[float, ...]


@dataclass(frozen=True)
class DetectionNotification:
    session_id: int
    cluster_size: int
    centroid: tuple[float, float, float]
    image_uri: str
    type = "detection"


@dataclass(frozen=True)
class CloudChunk:
    session_id: int
    revision: int
    seq: int
    total: int
    points: tuple[tuple[float, float, float], ...]
    colors: Optional[tuple[tuple[int, int, int], ...]] = None
    type = "cloud"


@dataclass(frozen=True)
class GoalPoseMsg:
    session_id: int
    position: tuple[float, float, float]
    yaw: float
    type = "goal_pose"


@dataclass(frozen=True)
class PlanSummary:
    session_id: int
    revision: int
    fixture_count: int
    reachable_count: int
    coverage_fraction: float
    spacing: float
    offset: float
    type = "plan"


@dataclass(frozen=True)
class Decision:
    session_id: int
    value: str
    type = "decision"


@dataclass(frozen=True)
class ExclusionSetMsg:
    session_id: int
    volumes: tuple[VolumeSpec, ...] = field(default_factory=tuple)
    type = "exclusions"


@dataclass(frozen=True)
class ExecutionStatus:
    session_id: int
    phase: str
    type = "status"


@dataclass(frozen=True)
class ErrorMsg:
    code: str
    detail: str
    type = "error"


Message = Union[
    DetectionNotification,
    CloudChunk,
    GoalPoseMsg,
    PlanSummary,
    Decision,
    ExclusionSetMsg,
    ExecutionStatus,
    ErrorMsg,
]

MESSAGE_TYPES = (
    DetectionNotification,
    CloudChunk,
    GoalPoseMsg,
    PlanSummary,
    Decision,
    ExclusionSetMsg,
    ExecutionStatus,
    ErrorMsg,
)


def encode_message(msg: Message) -> bytes:
    """Render one message as a UTF-8 JSON object."""
    if isinstance(msg, DetectionNotification):
        obj = {
            "type": msg.type,
            "session_id": msg.session_id,
            "cluster_size": msg.cluster_size,
            "centroid": list(msg.centroid),
            "image_uri": msg.image_uri,
        }
    elif isinstance(msg, CloudChunk):
        obj = {
            "type": msg.type,
            "session_id": msg.session_id,
            "revision": msg.revision,
            "seq": msg.seq,
            "total": msg.total,
            "points": [list(p) for p in msg.points],
        }
        if msg.colors is not None:
            obj["colors"] = [list(c) for c in msg.colors]
    elif isinstance(msg, GoalPoseMsg):
        obj = {
            "type": msg.type,
            "session_id": msg.session_id,
            "position": list(msg.position),
            "yaw": msg.yaw,
        }
    elif isinstance(msg, PlanSummary):
        obj = {
            "type": msg.type,
            "session_id": msg.session_id,
            "revision": msg.revision,
            "fixture_count": msg.fixture_count,
            "reachable_count": msg.reachable_count,
            "coverage_fraction": msg.coverage_fraction,
            "spacing": msg.spacing,
            "offset": msg.offset,
        }
    elif isinstance(msg, Decision):
        obj = {"type": msg.type, "session_id": msg.session_id, "value": msg.value}
    elif isinstance(msg, ExclusionSetMsg):
        obj = {
            "type": msg.type,
            "session_id": msg.session_id,
            "volumes": [
                {
                    "shape": v.shape,
                    "pose": {
                        "position": list(v.position),
                        "orientation": list(v.orientation),
                    },
                    "dims": list(v.dims),
                }
                for v in msg.volumes
            ],
        }
    elif isinstance(msg, ExecutionStatus):
        obj = {"type": msg.type, "session_id": msg.session_id, "phase": msg.phase}
    elif isinstance(msg, ErrorMsg):
        obj = {"type": msg.type, "code": msg.code, "detail": msg.detail}
    else:
        raise TypeError(f"not a wire message: {type(msg).__name__}")
    return json.dumps(obj, separators=(",", ":")).encode("utf-8")


def _require(obj: dict, key: str, kinds) -> object:
    if key not in obj:
        raise MalformedMessage(f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise MalformedMessage(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _int_field(obj: dict, key: str, minimum: Optional[int] = None) -> int:
    value = _require(obj, key, int)
    if minimum is not None and value < minimum:
        raise SchemaViolation(f"field {key!r} must be >= {minimum}, got {value}")
    return value


def _float_field(obj: dict, key: str) -> float:
    value = _require(obj, key, (int, float))
    value = float(value)
    if not math.isfinite(value):
        raise SchemaViolation(f"field {key!r} is not finite")
    return value


def _str_field(obj: dict, key: str) -> str:
    return _require(obj, key, str)


def _vector(obj: dict, key: str, length: int) -> tuple[float, ...]:
    raw = _require(obj, key, list)
    if len(raw) != length:
        raise MalformedMessage(f"field {key!r} must have {length} entries")
    out = []
    for v in raw:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise MalformedMessage(f"field {key!r} has a non-numeric entry")
        v = float(v)
        if not math.isfinite(v):
            raise SchemaViolation(f"field {key!r} has a non-finite entry")
        out.append(v)
    return tuple(out)


def _decode_volume(raw: object) -> VolumeSpec:
    if not isinstance(raw, dict):
        raise MalformedMessage("volume entry must be an object")
    shape = _str_field(raw, "shape")
    if shape not in _SHAPE_TAGS:
        raise SchemaViolation(f"unknown shape {shape!r}")
    pose = _require(raw, "pose", dict)
    position = _vector(pose, "position", 3)
    orientation = _vector(pose, "orientation", 4)
    norm = math.sqrt(sum(v * v for v in orientation))
    if abs(norm - 1.0) > 1e-6:
        raise SchemaViolation(f"orientation norm {norm} is not 1")
    dims_raw = _require(raw, "dims", list)
    expected = {"box": 3, "cylinder": 2, "sphere": 1}[shape]
    if len(dims_raw) != expected:
        raise SchemaViolation(f"{shape} takes {expected} dims, got {len(dims_raw)}")
    dims = []
    for d in dims_raw:
        if not isinstance(d, (int, float)) or isinstance(d, bool):
            raise MalformedMessage("dims must be numbers")
        d = float(d)
        if not math.isfinite(d) or d <= 0:
            raise SchemaViolation(f"dims must be positive and finite, got {d}")
        dims.append(d)
    return VolumeSpec(shape, position, orientation, tuple(dims))


def decode_message(data) -> Message:
    """Parse one wire frame; see module docstring for the error contract."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedMessage(f"invalid utf-8: {exc}") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedMessage(f"invalid json: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedMessage("message must be a json object")
    if "type" not in obj:
        raise MalformedMessage("missing field 'type'")
    kind = obj["type"]
    if not isinstance(kind, str):
        raise MalformedMessage("field 'type' must be a string")

    if kind == "detection":
        return DetectionNotification(
            session_id=_int_field(obj, "session_id"),
            cluster_size=_int_field(obj, "cluster_size", 0),
            centroid=_vector(obj, "centroid", 3),
            image_uri=_str_field(obj, "image_uri"),
        )
    if kind == "cloud":
        raw_points = _require(obj, "points", list)
        points = []
        for p in raw_points:
            if not isinstance(p, list) or len(p) != 3:
                raise MalformedMessage("points entries must be [x, y, z]")
            if any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in p):
                raise MalformedMessage("points entries must be numbers")
            if any(not math.isfinite(float(v)) for v in p):
                raise SchemaViolation("points must be finite")
            points.append(tuple(float(v) for v in p))
        colors = None
        if "colors" in obj:
            raw_colors = _require(obj, "colors", list)
            if len(raw_colors) != len(points):
                raise SchemaViolation("colors must parallel points")
            colors = []
            for c in raw_colors:
                if not isinstance(c, list) or len(c) != 3:
                    raise MalformedMessage("colors entries must be [r, g, b]")
                if any(not isinstance(v, int) or isinstance(v, bool) for v in c):
                    raise MalformedMessage("colors entries must be integers")
                if any(v < 0 or v > 255 for v in c):
                    raise SchemaViolation("color channels must lie in 0..255")
                colors.append(tuple(c))
            colors = tuple(colors)
        total = _int_field(obj, "total", 1)
        seq = _int_field(obj, "seq", 0)
        if seq >= total:
            raise SchemaViolation(f"seq {seq} out of range for total {total}")
        return CloudChunk(
            session_id=_int_field(obj, "session_id"),
            revision=_int_field(obj, "revision", 0),
            seq=seq,
            total=total,
            points=tuple(points),
            colors=colors,
        )
    if kind == "goal_pose":
        return GoalPoseMsg(
            session_id=_int_field(obj, "session_id"),
            position=_vector(obj, "position", 3),
            yaw=_float_field(obj, "yaw"),
        )
    if kind == "plan":
        coverage = _float_field(obj, "coverage_fraction")
        if not 0.0 <= coverage <= 1.0:
            raise SchemaViolation(f"coverage_fraction {coverage} outside [0, 1]")
        spacing = _float_field(obj, "spacing")
        offset = _float_field(obj, "offset")
        if spacing <= 0 or offset <= 0:
            raise SchemaViolation("spacing and offset must be positive")
        return PlanSummary(
            session_id=_int_field(obj, "session_id"),
            revision=_int_field(obj, "revision", 0),
            fixture_count=_int_field(obj, "fixture_count", 0),
            reachable_count=_int_field(obj, "reachable_count", 0),
            coverage_fraction=coverage,
            spacing=spacing,
            offset=offset,
        )
    if kind == "decision":
        value = _str_field(obj, "value")
        if value not in _DECISIONS:
            raise SchemaViolation(f"unknown decision {value!r}")
        return Decision(session_id=_int_field(obj, "session_id"), value=value)
    if kind == "exclusions":
        raw_volumes = _require(obj, "volumes", list)
        return ExclusionSetMsg(
            session_id=_int_field(obj, "session_id"),
            volumes=tuple(_decode_volume(v) for v in raw_volumes),
        )
    if kind == "status":
        phase = _str_field(obj, "phase")
        if phase not in _PHASES:
            raise SchemaViolation(f"unknown phase {phase!r}")
        return ExecutionStatus(session_id=_int_field(obj, "session_id"), phase=phase)
    if kind == "error":
        return ErrorMsg(code=_str_field(obj, "code"), detail=_str_field(obj, "detail"))
    raise UnknownType(f"unknown message type {kind!r}")


# --- domain conversions ---

def from_exclusion_volume(volume: ExclusionVolume) -> VolumeSpec:
    q = volume.pose.orientation
    t = volume.pose.position
    return VolumeSpec(
        shape=volume.shape.value,
        position=(t.x, t.y, t.z),
        orientation=(q.w, q.x, q.y, q.z),
        dims=volume.dims,
    )


def to_exclusion_volume(spec: VolumeSpec) -> ExclusionVolume:
    pose = Pose(Point3(*spec.position), UnitQuaternion(*spec.orientation))
    return ExclusionVolume(Shape(spec.shape), pose, spec.dims)


def to_exclusion_set(msg: ExclusionSetMsg, cluster_id: int) -> ExclusionSet:
    return ExclusionSet(cluster_id, tuple(to_exclusion_volume(v) for v in msg.volumes))


def chunk_cloud(session_id: int, revision: int, points, colors=None) -> list[CloudChunk]:
    """Split a cloud into CloudChunk messages of at most CHUNK_POINTS points.

    An empty cloud still produces one (empty) chunk so receivers always get
    a complete revision.
    """
    pts = [tuple(map(float, p)) for p in points]
    cols = [tuple(map(int, c)) for c in colors] if colors is not None else None
    total = max(1, -(-len(pts) // CHUNK_POINTS))
    chunks = []
    for seq in range(total):
        lo, hi = seq * CHUNK_POINTS, (seq + 1) * CHUNK_POINTS
        chunks.append(
            CloudChunk(
                session_id=session_id,
                revision=revision,
                seq=seq,
                total=total,
                points=tuple(pts[lo:hi]),
                colors=tuple(cols[lo:hi]) if cols is not None else None,
            )
        )
    return chunks
