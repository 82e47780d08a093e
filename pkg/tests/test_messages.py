import json
import math

import numpy as np
import pytest

from star_repair.errors import MalformedMessage, SchemaViolation, UnknownType
from star_repair.exclusion import ExclusionVolume, Shape
from star_repair.geom import Point3, Pose, UnitQuaternion
from star_repair.messages import (
    CloudChunk,
    Decision,
    DetectionNotification,
    ErrorMsg,
    ExclusionSetMsg,
    ExecutionStatus,
    GoalPoseMsg,
    PlanSummary,
    VolumeSpec,
    chunk_cloud,
    decode_message,
    encode_message,
    from_exclusion_volume,
    to_exclusion_volume,
)
from conftest import random_unit_quaternion


def random_volume_spec(rng) -> VolumeSpec:
    shape = ["box", "cylinder", "sphere"][int(rng.integers(3))]
    dims = {
        "box": tuple(rng.uniform(0.01, 2.0, 3)),
        "cylinder": tuple(rng.uniform(0.01, 2.0, 2)),
        "sphere": (float(rng.uniform(0.01, 2.0)),),
    }[shape]
    q = random_unit_quaternion(rng)
    return VolumeSpec(
        shape=shape,
        position=tuple(rng.uniform(-3, 3, 3)),
        orientation=(q.w, q.x, q.y, q.z),
        dims=dims,
    )


def random_message(rng, kind):
    sid = int(rng.integers(1, 100))
    if kind == "detection":
        return DetectionNotification(sid, int(rng.integers(0, 10000)),
                                     tuple(rng.uniform(-5, 5, 3)), "assets/img.png")
    if kind == "cloud":
        n = int(rng.integers(0, 30))
        points = tuple(tuple(rng.uniform(-2, 2, 3)) for _ in range(n))
        colors = None
        if rng.uniform() < 0.5:
            colors = tuple(tuple(int(v) for v in rng.integers(0, 256, 3)) for _ in range(n))
        total = int(rng.integers(1, 5))
        return CloudChunk(sid, int(rng.integers(0, 4)), int(rng.integers(0, total)),
                          total, points, colors)
    if kind == "goal_pose":
        return GoalPoseMsg(sid, tuple(rng.uniform(-5, 5, 3)),
                           float(rng.uniform(-math.pi, math.pi)))
    if kind == "plan":
        fixtures = int(rng.integers(0, 500))
        reachable = int(rng.integers(0, fixtures + 1))
        return PlanSummary(sid, int(rng.integers(0, 4)), fixtures, reachable,
                           float(rng.uniform(0, 1)), float(rng.uniform(0.01, 0.2)),
                           float(rng.uniform(0.05, 0.4)))
    if kind == "decision":
        return Decision(sid, ["repair", "modify", "reject"][int(rng.integers(3))])
    if kind == "exclusions":
        return ExclusionSetMsg(
            sid, tuple(random_volume_spec(rng) for _ in range(int(rng.integers(0, 4))))
        )
    if kind == "status":
        return ExecutionStatus(sid, ["navigating", "executing", "done"][int(rng.integers(3))])
    if kind == "error":
        return ErrorMsg("code_" + str(int(rng.integers(10))), "detail text")
    raise AssertionError(kind)


ALL_KINDS = ["detection", "cloud", "goal_pose", "plan", "decision",
             "exclusions", "status", "error"]


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_round_trip_identity_fuzz(kind, rng):
    for _ in range(200):
        msg = random_message(rng, kind)
        assert decode_message(encode_message(msg)) == msg


def test_decision_wire_shape():
    data = encode_message(Decision(7, "repair"))
    obj = json.loads(data)
    assert obj == {"type": "decision", "session_id": 7, "value": "repair"}


def test_exclusion_box_wire_shape():
    volume = ExclusionVolume(
        Shape.BOX,
        Pose(Point3(1.0, 0.0, 0.5), UnitQuaternion.identity()),
        (0.3, 0.2, 0.4),
    )
    msg = ExclusionSetMsg(3, (from_exclusion_volume(volume),))
    obj = json.loads(encode_message(msg))
    assert obj["type"] == "exclusions"
    assert obj["volumes"][0]["shape"] == "box"
    assert obj["volumes"][0]["pose"]["position"] == [1.0, 0.0, 0.5]
    assert obj["volumes"][0]["pose"]["orientation"] == [1.0, 0.0, 0.0, 0.0]
    assert obj["volumes"][0]["dims"] == [0.3, 0.2, 0.4]
    assert decode_message(encode_message(msg)) == msg


def test_negative_dims_schema_violation():
    obj = {
        "type": "exclusions",
        "session_id": 1,
        "volumes": [{
            "shape": "box",
            "pose": {"position": [0, 0, 0], "orientation": [1, 0, 0, 0]},
            "dims": [-1, 1, 1],
        }],
    }
    with pytest.raises(SchemaViolation):
        decode_message(json.dumps(obj))


def test_unknown_type_rejected():
    with pytest.raises(UnknownType):
        decode_message(b'{"type": "telemetry", "session_id": 1}')


def test_malformed_json_rejected():
    with pytest.raises(MalformedMessage):
        decode_message(b"{nope")
    with pytest.raises(MalformedMessage):
        decode_message(b'"just a string"')
    with pytest.raises(MalformedMessage):
        decode_message(b'{"session_id": 1}')


def test_missing_field_malformed():
    with pytest.raises(MalformedMessage):
        decode_message(b'{"type": "decision", "value": "repair"}')


def test_bad_enum_values():
    with pytest.raises(SchemaViolation):
        decode_message(b'{"type": "decision", "session_id": 1, "value": "paint"}')
    with pytest.raises(SchemaViolation):
        decode_message(b'{"type": "status", "session_id": 1, "phase": "resting"}')


def test_extra_fields_ignored():
    msg = decode_message(
        b'{"type": "decision", "session_id": 1, "value": "repair", "extra": 42}'
    )
    assert msg == Decision(1, "repair")


def test_non_unit_orientation_rejected():
    obj = {
        "type": "exclusions",
        "session_id": 1,
        "volumes": [{
            "shape": "sphere",
            "pose": {"position": [0, 0, 0], "orientation": [2, 0, 0, 0]},
            "dims": [1],
        }],
    }
    with pytest.raises(SchemaViolation):
        decode_message(json.dumps(obj))


def test_wrong_dims_arity_rejected():
    obj = {
        "type": "exclusions",
        "session_id": 1,
        "volumes": [{
            "shape": "cylinder",
            "pose": {"position": [0, 0, 0], "orientation": [1, 0, 0, 0]},
            "dims": [1],
        }],
    }
    with pytest.raises(SchemaViolation):
        decode_message(json.dumps(obj))


def test_seq_out_of_range():
    obj = {"type": "cloud", "session_id": 1, "revision": 0,
           "seq": 2, "total": 2, "points": []}
    with pytest.raises(SchemaViolation):
        decode_message(json.dumps(obj))


def test_volume_round_trip_through_domain(rng):
    for _ in range(50):
        spec = random_volume_spec(rng)
        volume = to_exclusion_volume(spec)
        back = from_exclusion_volume(volume)
        assert back.shape == spec.shape
        assert np.allclose(back.position, spec.position)
        assert np.allclose(back.dims, spec.dims)
        dot = abs(sum(a * b for a, b in zip(back.orientation, spec.orientation)))
        assert abs(dot - 1.0) < 1e-9


def test_chunking_respects_limit_and_order(rng):
    points = rng.uniform(-1, 1, (10000, 3)).tolist()
    colors = rng.integers(0, 256, (10000, 3)).tolist()
    chunks = chunk_cloud(5, 2, points, colors)
    assert all(len(c.points) <= 4096 for c in chunks)
    assert [c.seq for c in chunks] == list(range(len(chunks)))
    assert all(c.total == len(chunks) for c in chunks)
    reassembled = [p for c in chunks for p in c.points]
    assert len(reassembled) == 10000
    assert np.allclose(reassembled, points)
    recolored = [c for ch in chunks for c in ch.colors]
    assert np.array_equal(recolored, colors)


def test_empty_cloud_still_one_chunk():
    chunks = chunk_cloud(1, 0, [])
    assert len(chunks) == 1
    assert chunks[0].total == 1 and chunks[0].points == ()
