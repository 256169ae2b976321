"""5-DoF manipulator: kinematics, joint limits, servo wire encoding,
obstacle collision checks, and three-waypoint trim planning.

Joint chain (arm-base frame, x forward, z up), all limits +-pi/2:

    J1 yaw (base z) -> base column up -> J2 pitch -> upper arm ->
    J3 pitch -> forearm -> J4 roll (forearm axis) -> J5 yaw -> gripper

The zero configuration is the fully extended straight pose: the gripper
tip sits at (reach, 0, base_height) with reach = upper + forearm + gripper.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Transform, compose

HALF_PI = math.pi / 2.0

JOINT_AXES = ("yaw", "pitch", "pitch", "roll", "yaw")  # J1..J5
LINK_NAMES = ("base_column", "upper_arm", "forearm", "gripper")


@dataclass(frozen=True)
class ArmModel:
    """Geometry and limits; torque ratings are metadata only (kinematic sim)."""

    base_height: float = 0.10      # m, J1 to shoulder along z
    upper_length: float = 0.150    # m, J2 to J3
    forearm_length: float = 0.150  # m, J3 to wrist (J4/J5)
    gripper_length: float = 0.103  # m, wrist to gripper tip
    joint_limit: float = HALF_PI   # rad, symmetric on every joint
    max_joint_rate: float = 2.0    # rad/s, used by the simulator
    link_radius: float = 0.02      # m, collision capsule radius
    servo_torque_kg_cm: tuple = (17.0, 25.0, 17.0, 17.0, 8.0)  # metadata

    @property
    def reach(self) -> float:
        """Planar reach at full extension."""
        return self.upper_length + self.forearm_length + self.gripper_length


@dataclass(frozen=True)
class JointVector:
    q: tuple  # 5 angles, radians

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        if len(self.q) != 5:
            raise ValueError("joint vector needs exactly 5 angles")

    def as_array(self) -> np.ndarray:
        return np.array(self.q)

    @classmethod
    def zeros(cls) -> "JointVector":
        return cls((0.0,) * 5)


@dataclass(frozen=True)
class ServoFrame:
    positions: tuple  # 5 ints in [0, 1000]
    duration_ms: int = 800

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if len(self.positions) != 5:
            raise ValueError("servo frame needs exactly 5 positions")
        for i, p in enumerate(self.positions):
            if not 0 <= p <= 1000:
                raise ValueError(f"servo position {i + 1} out of range [0, 1000]: {p}")
        if self.duration_ms < 0:
            raise ValueError("duration_ms must be non-negative")


class JointLimitError(ValueError):
    def __init__(self, joint_index: int, value: float, limit: float):
        self.joint_index = joint_index
        super().__init__(
            f"joint {joint_index + 1} at {value:.4f} rad exceeds limit +-{limit:.4f}")


def check_limits(model: ArmModel, q: JointVector) -> None:
    for i, v in enumerate(q.q):
        if abs(v) > model.joint_limit + 1e-12:
            raise JointLimitError(i, v, model.joint_limit)


def clamp_to_limits(model: ArmModel, q: np.ndarray) -> np.ndarray:
    return np.clip(q, -model.joint_limit, model.joint_limit)


# --- forward kinematics -------------------------------------------------
# The hot path (IK runs thousands of FK evaluations) works on plain 3x3
# rotation matrices and 3-vectors; the public API wraps the result in a
# Transform.


def _rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _chain(model: ArmModel, qv) -> dict:
    """Intermediate frames for FK, Jacobian, and link capsules.

    Returns joint origins/axes plus the shoulder/elbow/wrist/tip points and
    the tip rotation, all in the arm-base frame.
    """
    q = qv
    base = np.zeros(3)
    r1 = _rot_z(q[0])
    shoulder = np.array([0.0, 0.0, model.base_height])
    r2 = r1 @ _rot_y(q[1])
    elbow = shoulder + r2 @ np.array([model.upper_length, 0.0, 0.0])
    r3 = r2 @ _rot_y(q[2])
    wrist = elbow + r3 @ np.array([model.forearm_length, 0.0, 0.0])
    r4 = r3 @ _rot_x(q[3])
    r5 = r4 @ _rot_z(q[4])
    tip = wrist + r5 @ np.array([model.gripper_length, 0.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    ey = np.array([0.0, 1.0, 0.0])
    ex = np.array([1.0, 0.0, 0.0])
    return {
        "origins": [base, shoulder, elbow, wrist, wrist],
        "axes": [ez, r1 @ ey, r2 @ ey, r3 @ ex, r4 @ ez],
        "points": (base, shoulder, elbow, wrist, tip),
        "tip_rotation": r5,
    }


def forward_kinematics(model: ArmModel, q: JointVector) -> Transform:
    """Gripper tip pose in the arm-base frame; raises on out-of-limit joints."""
    check_limits(model, q)
    c = _chain(model, q.q)
    return Transform.from_matrix(c["tip_rotation"], c["points"][4])


def link_segments(model: ArmModel, q: JointVector) -> list:
    """Capsule axis segments [(name, p0, p1)] in the arm-base frame."""
    check_limits(model, q)
    base, shoulder, elbow, wrist, tip = _chain(model, q.q)["points"]
    return [
        (LINK_NAMES[0], base, shoulder),
        (LINK_NAMES[1], shoulder, elbow),
        (LINK_NAMES[2], elbow, wrist),
        (LINK_NAMES[3], wrist, tip),
    ]


def position_jacobian(model: ArmModel, q: JointVector) -> np.ndarray:
    """3x5 geometric Jacobian of the tip position."""
    c = _chain(model, q.q)
    p = c["points"][4]
    cols = [np.cross(c["axes"][i], p - c["origins"][i]) for i in range(5)]
    return np.column_stack(cols)


# --- inverse kinematics -------------------------------------------------


@dataclass(frozen=True)
class IKResult:
    q: JointVector
    position_error: float  # m
    iterations: int
    converged: bool
    reason: str | None = None


def inverse_kinematics(
    model: ArmModel,
    target,
    seed_q: JointVector | None = None,
    *,
    posture: JointVector | None = None,
    tolerance: float = 1e-3,
    max_iterations: int = 500,
    damping: float = 0.05,
    step_cap: float = 0.2,
) -> IKResult:
    """Damped-least-squares position IK with joint limits.

    target may be a 3-vector position or a Transform (position used).
    Limits are enforced by clamping each iterate; a null-space term pulls
    the solution toward `posture` (defaults to the seed) to resolve the
    redundancy without disturbing the tip.
    """
    if isinstance(target, Transform):
        target_p = target.translation
    else:
        target_p = np.asarray(target, dtype=float)
    seed = seed_q if seed_q is not None else JointVector.zeros()
    check_limits(model, seed)
    posture_arr = (posture.as_array() if posture is not None else seed.as_array())

    planar = math.hypot(target_p[0], target_p[1])
    shoulder = np.array([0.0, 0.0, model.base_height])
    if planar > model.reach or np.linalg.norm(target_p - shoulder) > model.reach:
        return IKResult(seed, float("inf"), 0, False, "unreachable")

    q = seed.as_array()
    best_q = q.copy()
    best_err = float("inf")
    eye3 = np.eye(3)
    eye5 = np.eye(5)
    for it in range(max_iterations + 1):
        c = _chain(model, q)
        tip = c["points"][4]
        err_vec = target_p - tip
        err = float(np.linalg.norm(err_vec))
        if err < best_err:
            best_err = err
            best_q = q.copy()
        if err <= tolerance:
            return IKResult(JointVector(tuple(q)), err, it, True)
        if it == max_iterations:
            break
        j = np.column_stack([np.cross(c["axes"][i], tip - c["origins"][i])
                             for i in range(5)])
        # Error-scaled damping: heavy far out, near-Newton close in.
        lam2 = damping * damping * min(1.0, err / 0.05) + 1e-10
        jjt = j @ j.T + lam2 * eye3
        jt_solve = j.T @ np.linalg.inv(jjt)
        dq = jt_solve @ err_vec
        # Null-space pull toward the posture reference (mid-range retreat);
        # faded out near convergence so it cannot hold a limit cycle.
        if err > 10.0 * tolerance:
            dq += 0.1 * (eye5 - jt_solve @ j) @ (posture_arr - q)
        step = float(np.max(np.abs(dq)))
        if step > step_cap:
            dq *= step_cap / step
        q = clamp_to_limits(model, q + dq)
    return IKResult(JointVector(tuple(best_q)), best_err, max_iterations, False,
                    "did not converge")


# --- servo wire encoding ------------------------------------------------

_SERVO_SPAN = 1000.0


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def radians_to_servo(q: JointVector, duration_ms: int = 800) -> ServoFrame:
    """Linear map [-pi/2, +pi/2] -> [0, 1000], rounded half away from zero."""
    positions = []
    for i, v in enumerate(q.q):
        if abs(v) > HALF_PI + 1e-12:
            raise JointLimitError(i, v, HALF_PI)
        positions.append(_round_half_away((v + HALF_PI) / math.pi * _SERVO_SPAN))
    return ServoFrame(tuple(positions), duration_ms)


def servo_to_radians(frame: ServoFrame) -> JointVector:
    return JointVector(tuple(p / _SERVO_SPAN * math.pi - HALF_PI for p in frame.positions))


# --- collision checking -------------------------------------------------


@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned box in the arm-base frame."""
    min_corner: tuple
    max_corner: tuple

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=float)
        hi = np.asarray(self.max_corner, dtype=float)
        if np.any(hi < lo):
            raise ValueError("cuboid has negative extent")

    def distance_to_point(self, p: np.ndarray) -> float:
        lo = np.asarray(self.min_corner)
        hi = np.asarray(self.max_corner)
        d = np.maximum(np.maximum(lo - p, 0.0), p - hi)
        return float(np.linalg.norm(d))


@dataclass(frozen=True)
class Cylinder:
    """Finite cylinder: base point, unit axis direction, radius, height."""
    base: tuple
    axis: tuple = (0.0, 0.0, 1.0)
    radius: float = 0.02
    height: float = 0.25

    def __post_init__(self):
        if self.radius < 0 or self.height < 0:
            raise ValueError("cylinder needs non-negative radius and height")
        a = np.asarray(self.axis, dtype=float)
        object.__setattr__(self, "axis", tuple(a / np.linalg.norm(a)))

    def distance_to_point(self, p: np.ndarray) -> float:
        base = np.asarray(self.base)
        axis = np.asarray(self.axis)
        rel = p - base
        t = float(rel @ axis)
        radial = rel - t * axis
        dr = max(0.0, float(np.linalg.norm(radial)) - self.radius)
        da = max(0.0, -t, t - self.height)
        return math.hypot(dr, da)


@dataclass(frozen=True)
class ObstacleSet:
    cuboids: tuple = ()
    cylinders: tuple = ()

    @classmethod
    def of(cls, *obstacles) -> "ObstacleSet":
        return cls(
            cuboids=tuple(o for o in obstacles if isinstance(o, Cuboid)),
            cylinders=tuple(o for o in obstacles if isinstance(o, Cylinder)),
        )


def _segment_to_convex(p0: np.ndarray, p1: np.ndarray, dist_fn) -> float:
    """Min distance from segment to a convex body via ternary search.

    Distance to a convex set is convex along the segment, so ternary search
    converges to the global minimum.
    """
    lo, hi = 0.0, 1.0
    for _ in range(80):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if dist_fn(p0 + m1 * (p1 - p0)) <= dist_fn(p0 + m2 * (p1 - p0)):
            hi = m2
        else:
            lo = m1
    mid = 0.5 * (lo + hi)
    return dist_fn(p0 + mid * (p1 - p0))


@dataclass(frozen=True)
class CollisionResult:
    clear: bool
    link: str | None = None
    obstacle_kind: str | None = None
    obstacle_index: int | None = None

    def __bool__(self) -> bool:
        return self.clear


def check_collision(model: ArmModel, q: JointVector, obstacles: ObstacleSet) -> CollisionResult:
    """Test every link capsule against every obstacle; first hit wins."""
    segments = link_segments(model, q)
    for name, p0, p1 in segments:
        for idx, box in enumerate(obstacles.cuboids):
            if _segment_to_convex(p0, p1, box.distance_to_point) <= model.link_radius:
                return CollisionResult(False, name, "cuboid", idx)
        for idx, cyl in enumerate(obstacles.cylinders):
            if _segment_to_convex(p0, p1, cyl.distance_to_point) <= model.link_radius:
                return CollisionResult(False, name, "cylinder", idx)
    return CollisionResult(True)


# --- trim maneuver planning ----------------------------------------------


class GripperAction(enum.Enum):
    OPEN = "open"
    CLOSE = "close"


@dataclass(frozen=True)
class TrimPlan:
    waypoints: tuple  # ((JointVector, GripperAction), ...)
    approach: str     # "direct", "side_left", "side_right"


class TrimPlanningError(RuntimeError):
    def __init__(self, reasons: dict):
        self.reasons = dict(reasons)
        detail = "; ".join(f"{k}: {v}" for k, v in self.reasons.items())
        super().__init__(f"no collision-free trim approach: {detail}")


def _approach_candidates(target: np.ndarray, standoff: float):
    """Yield (name, standoff point, posture bias) for direct and side reaches."""
    toward = target.copy()
    toward[2] = 0.0
    n = np.linalg.norm(toward)
    if n < 1e-9:
        toward = np.array([1.0, 0.0, 0.0])
    else:
        toward = toward / n
    left = np.array([-toward[1], toward[0], 0.0])
    yield "direct", target - standoff * toward, None
    side = math.sin(math.radians(40.0))
    fwd = math.cos(math.radians(40.0))
    for name, lateral, roll in (("side_left", left, -HALF_PI / 2),
                                ("side_right", -left, HALF_PI / 2)):
        d = fwd * toward + side * lateral
        bias = JointVector((0.0, 0.0, 0.0, roll, 0.0))
        yield name, target - standoff * d, bias


def plan_trim(
    model: ArmModel,
    target,
    obstacles: ObstacleSet,
    *,
    standoff: float = 0.05,
    seed_q: JointVector | None = None,
) -> TrimPlan:
    """Plan standoff -> grasp -> retreat, retrying around the stem if needed.

    The direct approach runs straight at the target; if it collides (the
    plant stem sits between arm and target) the planner rolls J4 and comes
    in from either side. Raises TrimPlanningError when every approach fails.
    """
    target = np.asarray(target, dtype=float)
    planar = math.hypot(target[0], target[1])
    if planar > model.reach:
        raise TrimPlanningError({"reach": f"target at {planar:.3f} m planar exceeds "
                                          f"{model.reach:.3f} m"})
    seed = seed_q if seed_q is not None else JointVector.zeros()
    reasons = {}
    for name, pre_point, bias in _approach_candidates(target, standoff):
        pre = inverse_kinematics(model, pre_point, seed, posture=bias)
        if not pre.converged:
            reasons[name] = f"standoff IK failed ({pre.reason})"
            continue
        grasp = inverse_kinematics(model, target, pre.q, posture=bias)
        if not grasp.converged:
            reasons[name] = f"grasp IK failed ({grasp.reason})"
            continue
        blocked = None
        for label, jv in (("standoff", pre.q), ("grasp", grasp.q)):
            hit = check_collision(model, jv, obstacles)
            if not hit:
                blocked = f"{label} collides ({hit.link} vs {hit.obstacle_kind})"
                break
        if blocked:
            reasons[name] = blocked
            continue
        return TrimPlan(
            waypoints=(
                (pre.q, GripperAction.OPEN),
                (grasp.q, GripperAction.CLOSE),
                (pre.q, GripperAction.OPEN),
            ),
            approach=name,
        )
    raise TrimPlanningError(reasons)
