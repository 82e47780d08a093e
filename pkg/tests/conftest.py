import numpy as np
import pytest

from star_repair.geom import Point3, Pose, UnitQuaternion


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    w, x, y, z = rng.normal(size=4)
    return UnitQuaternion(w, x, y, z)


def random_pose(rng: np.random.Generator, span: float = 2.0) -> Pose:
    t = rng.uniform(-span, span, size=3)
    return Pose(Point3(*t), random_unit_quaternion(rng))


def random_point(rng: np.random.Generator, span: float = 2.0) -> Point3:
    return Point3(*rng.uniform(-span, span, size=3))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
