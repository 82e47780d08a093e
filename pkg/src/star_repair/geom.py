"""Dependency-free rigid-body math: points, unit quaternions, poses.

Conventions (fixed for wire compatibility with the review UI):
  * active rotations, right-handed frames
  * quaternion component order (w, x, y, z)
  * double precision everywhere

All types are immutable values and every operation is a pure function, so
everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Point3:
    """A 3D position in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite Point3 component: {v!r}")

    def __add__(self, other: "Point3") -> "Point3":
        return Point3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Point3") -> "Point3":
        return Point3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Point3":
        return Point3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Point3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class UnitQuaternion:
    """Rotation as a unit quaternion (w, x, y, z).

    The constructor renormalizes, so the unit invariant holds within 1e-9
    after any operation; a near-zero norm is rejected.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(n) or n < 1e-12:
            raise ValueError(f"quaternion norm {n!r} is not normalizable")
        if abs(n - 1.0) > 1e-15:
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @staticmethod
    def identity() -> "UnitQuaternion":
        return UnitQuaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Point3, angle: float) -> "UnitQuaternion":
        n = axis.norm()
        if n < 1e-12:
            raise ValueError("rotation axis must be non-zero")
        half = 0.5 * angle
        s = math.sin(half) / n
        return UnitQuaternion(math.cos(half), axis.x * s, axis.y * s, axis.z * s)

    @staticmethod
    def from_rotation_matrix(m: list[list[float]]) -> "UnitQuaternion":
        """Shepperd's method; `m` is a row-major 3x3 rotation matrix."""
        t = m[0][0] + m[1][1] + m[2][2]
        if t > 0.0:
            s = math.sqrt(t + 1.0) * 2.0
            return UnitQuaternion(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        if m[0][0] > m[1][1] and m[0][0] > m[2][2]:
            s = math.sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0
            return UnitQuaternion(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        if m[1][1] > m[2][2]:
            s = math.sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0
            return UnitQuaternion(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        s = math.sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0
        return UnitQuaternion(
            (m[1][0] - m[0][1]) / s,
            (m[0][2] + m[2][0]) / s,
            (m[1][2] + m[2][1]) / s,
            0.25 * s,
        )

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def multiply(self, other: "UnitQuaternion") -> "UnitQuaternion":
        a, b = self, other
        return UnitQuaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def rotate(self, p: Point3) -> Point3:
        # out = p + 2*(w*(q_v x p) + q_v x (q_v x p)); the kernels backends
        # replicate this exact operation order, keep them in sync.
        ux = self.y * p.z - self.z * p.y
        uy = self.z * p.x - self.x * p.z
        uz = self.x * p.y - self.y * p.x
        vx = self.y * uz - self.z * uy
        vy = self.z * ux - self.x * uz
        vz = self.x * uy - self.y * ux
        return Point3(
            p.x + 2.0 * (self.w * ux + vx),
            p.y + 2.0 * (self.w * uy + vy),
            p.z + 2.0 * (self.w * uz + vz),
        )

    def rotation_matrix(self) -> list[list[float]]:
        w, x, y, z = self.w, self.x, self.y, self.z
        return [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def approx_equal(self, other: "UnitQuaternion", tol: float = _NORM_TOL) -> bool:
        """Equality up to the q/-q double cover."""
        d = abs(self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z)
        return abs(d - 1.0) <= tol


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotate by `orientation`, then translate by `position`."""

    position: Point3
    orientation: UnitQuaternion

    @staticmethod
    def identity() -> "Pose":
        return Pose(Point3(0.0, 0.0, 0.0), UnitQuaternion.identity())


def transform_point(pose: Pose, p: Point3) -> Point3:
    """Map a point from the pose's local frame into the world: R*p + t."""
    r = pose.orientation.rotate(p)
    return Point3(
        r.x + pose.position.x,
        r.y + pose.position.y,
        r.z + pose.position.z,
    )


def inverse_transform_point(pose: Pose, p: Point3) -> Point3:
    """Map a world point into the pose's local frame: R^-1*(p - t)."""
    d = Point3(
        p.x - pose.position.x,
        p.y - pose.position.y,
        p.z - pose.position.z,
    )
    return pose.orientation.conjugate().rotate(d)


def compose(a: Pose, b: Pose) -> Pose:
    """Pose such that transform(compose(a, b), p) == transform(a, transform(b, p))."""
    return Pose(transform_point(a, b.position), a.orientation.multiply(b.orientation))


def inverse(pose: Pose) -> Pose:
    qi = pose.orientation.conjugate()
    t = qi.rotate(pose.position)
    return Pose(Point3(-t.x, -t.y, -t.z), qi)
