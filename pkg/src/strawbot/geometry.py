"""Rigid-body poses and frame transforms shared by every other module.

Conventions: right-handed frames, world z up, angles in radians. Rotations
are stored as unit quaternions (w, x, y, z); matrices are accepted at
construction and normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_UNIT_TOL = 1e-9


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    elif t > math.pi:
        t -= 2.0 * math.pi
    return t


def angle_diff(a: float, b: float) -> float:
    """Shortest signed angle from b to a."""
    return normalize_angle(a - b)


@dataclass
class Pose2:
    """Planar pose: x, y in meters, theta normalized into (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        self.theta = normalize_angle(self.theta)

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def to_transform(self, z: float = 0.0) -> "Transform":
        """Lift to a 3-D transform at height z (rotation about world z)."""
        return Transform.from_rot_z(self.theta, translation=(self.x, self.y, z))


def _quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _matrix_to_quat(m: np.ndarray) -> np.ndarray:
    # Shepperd's method: pick the largest diagonal combination for stability.
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = np.array([(m[2, 1] - m[1, 2]) / s,
                      0.25 * s,
                      (m[0, 1] + m[1, 0]) / s,
                      (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = np.array([(m[0, 2] - m[2, 0]) / s,
                      (m[0, 1] + m[1, 0]) / s,
                      0.25 * s,
                      (m[1, 2] + m[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = np.array([(m[1, 0] - m[0, 1]) / s,
                      (m[0, 2] + m[2, 0]) / s,
                      (m[1, 2] + m[2, 1]) / s,
                      0.25 * s])
    return q / np.linalg.norm(q)


@dataclass
class Transform:
    """Rotation (unit quaternion) plus translation; maps points between frames.

    Applying the transform expresses a point given in the source frame in
    the target frame: p_target = R @ p_source + t.
    """

    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.quaternion = np.asarray(self.quaternion, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)
        n = np.linalg.norm(self.quaternion)
        if n == 0:
            raise ValueError("zero quaternion is not a rotation")
        if abs(n - 1.0) > _UNIT_TOL:
            self.quaternion = self.quaternion / n
        if self.quaternion[0] < 0:  # canonical hemisphere, w >= 0
            self.quaternion = -self.quaternion

    # --- constructors -----------------------------------------------------

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def from_axis_angle(cls, axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Transform":
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        half = 0.5 * angle
        q = np.concatenate([[math.cos(half)], math.sin(half) * axis])
        return cls(q, np.asarray(translation, dtype=float))

    @classmethod
    def from_rot_x(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "Transform":
        return cls.from_axis_angle((1.0, 0.0, 0.0), angle, translation)

    @classmethod
    def from_rot_y(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "Transform":
        return cls.from_axis_angle((0.0, 1.0, 0.0), angle, translation)

    @classmethod
    def from_rot_z(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "Transform":
        return cls.from_axis_angle((0.0, 0.0, 1.0), angle, translation)

    @classmethod
    def from_translation(cls, translation) -> "Transform":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.asarray(translation, dtype=float))

    @classmethod
    def from_matrix(cls, rotation, translation=(0.0, 0.0, 0.0)) -> "Transform":
        """Build from a 3x3 rotation matrix; must be orthonormal with det +1."""
        rotation = np.asarray(rotation, dtype=float)
        if rotation.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        err = np.abs(rotation @ rotation.T - np.eye(3)).max()
        if err > 1e-6 or np.linalg.det(rotation) < 0:
            raise ValueError("rotation matrix is not orthonormal with det +1")
        return cls(_matrix_to_quat(rotation), np.asarray(translation, dtype=float))

    # --- accessors --------------------------------------------------------

    @property
    def position(self) -> np.ndarray:
        return self.translation

    @property
    def orientation(self) -> np.ndarray:
        return self.quaternion

    @property
    def rotation_matrix(self) -> np.ndarray:
        return _quat_to_matrix(self.quaternion)

    def as_matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix
        m[:3, 3] = self.translation
        return m


# A world-frame pose of a body is the transform from body frame to world.
Pose3 = Transform


def compose(a: Transform, b: Transform) -> Transform:
    """Transform that applies b, then a."""
    q = _quat_multiply(a.quaternion, b.quaternion)
    t = a.translation + _quat_to_matrix(a.quaternion) @ b.translation
    return Transform(q, t)


def invert(t: Transform) -> Transform:
    q_inv = t.quaternion * np.array([1.0, -1.0, -1.0, -1.0])
    return Transform(q_inv, -(_quat_to_matrix(q_inv) @ t.translation))


def apply(t: Transform, points) -> np.ndarray:
    """Apply to a single 3-vector or an (N, 3) batch."""
    p = np.asarray(points, dtype=float)
    r = _quat_to_matrix(t.quaternion)
    if p.ndim == 1:
        return r @ p + t.translation
    return p @ r.T + t.translation
