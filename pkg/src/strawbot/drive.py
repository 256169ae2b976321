"""Mecanum chassis kinematics: body twist <-> four wheel angular speeds.

X-roller layout by default (rollers form an X seen from above); the O
layout flips the lateral coupling sign. Wheel order is fl, fr, rl, rr.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MecanumGeometry:
    wheel_radius: float = 0.05   # m
    half_length: float = 0.149   # m, chassis center to axle (x)
    half_width: float = 0.128    # m, chassis center to wheel (y)
    roller_layout: str = "x"     # "x" or "o"

    def __post_init__(self):
        if min(self.wheel_radius, self.half_length, self.half_width) <= 0:
            raise ValueError("mecanum geometry values must be strictly positive")
        if self.roller_layout not in ("x", "o"):
            raise ValueError(f"unknown roller layout {self.roller_layout!r}")

    @property
    def k(self) -> float:
        return self.half_length + self.half_width


@dataclass(frozen=True)
class BodyTwist:
    vx: float = 0.0     # m/s, forward
    vy: float = 0.0     # m/s, left
    omega: float = 0.0  # rad/s, ccw


@dataclass(frozen=True)
class WheelSpeeds:
    fl: float
    fr: float
    rl: float
    rr: float

    def as_array(self) -> np.ndarray:
        return np.array([self.fl, self.fr, self.rl, self.rr])


def _coupling_matrix(g: MecanumGeometry) -> np.ndarray:
    # Rows map (vx, vy, k*omega) onto each wheel's rim speed.
    s = 1.0 if g.roller_layout == "x" else -1.0
    return np.array([
        [1.0, -s, -1.0],
        [1.0, +s, +1.0],
        [1.0, +s, -1.0],
        [1.0, -s, +1.0],
    ])


def twist_to_wheels(t: BodyTwist, g: MecanumGeometry) -> WheelSpeeds:
    """Inverse kinematics: body twist to wheel angular speeds (rad/s)."""
    m = _coupling_matrix(g)
    w = m @ np.array([t.vx, t.vy, g.k * t.omega]) / g.wheel_radius
    return WheelSpeeds(*w)


def wheels_to_twist(w: WheelSpeeds, g: MecanumGeometry) -> BodyTwist:
    """Least-squares forward kinematics; exact inverse on reachable wheel sets."""
    m = _coupling_matrix(g)
    # Pseudo-inverse of the coupling matrix is m.T / 4 (columns orthogonal).
    v = (m.T @ w.as_array()) * (g.wheel_radius / 4.0)
    return BodyTwist(vx=v[0], vy=v[1], omega=v[2] / g.k)
