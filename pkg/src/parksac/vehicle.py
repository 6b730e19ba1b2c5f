"""Kinematic bicycle model: vehicle parameters, state, and the one-step integrator."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import OrientedRect, normalize_angle


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 2.5
    body_length: float = 4.0
    body_width: float = 1.8
    max_steer: float = math.radians(30.0)
    max_accel: float = 1.0
    max_speed: float = 2.0

    def __post_init__(self) -> None:
        for name in ("wheelbase", "body_length", "body_width", "max_steer",
                     "max_accel", "max_speed"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.max_steer < math.pi / 2:
            raise ValueError("max_steer must be below pi/2")
        if not self.body_length > self.wheelbase:
            raise ValueError("body_length must exceed wheelbase")

    @property
    def min_turn_radius(self) -> float:
        return self.wheelbase / math.tan(self.max_steer)


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class VehicleState:
    pose: Pose
    v: float = 0.0


@dataclass(frozen=True)
class ControlInput:
    steer: float
    throttle: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.throttle <= 1.0:
            raise ValueError(f"throttle must lie in [-1, 1], got {self.throttle}")


def step_kinematics(state: VehicleState, u: ControlInput, p: VehicleParams,
                    dt: float) -> VehicleState:
    """Advance the bicycle model one step of forward Euler at the old state.

    Position and heading integrate the current velocity; the velocity update
    maps throttle to acceleration u.throttle * max_accel, clamped to the
    speed envelope.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if abs(u.steer) > p.max_steer + 1e-9:
        raise ValueError(f"steer {u.steer} exceeds limit {p.max_steer}")
    x, y, theta = state.pose.x, state.pose.y, state.pose.theta
    v = state.v
    nx = x + v * math.cos(theta) * dt
    ny = y + v * math.sin(theta) * dt
    ntheta = normalize_angle(theta + v / p.wheelbase * math.tan(u.steer) * dt)
    nv = v + u.throttle * p.max_accel * dt
    nv = max(-p.max_speed, min(p.max_speed, nv))
    return VehicleState(Pose(nx, ny, ntheta), nv)


def footprint(pose: Pose, p: VehicleParams) -> OrientedRect:
    """Body rectangle centered on the pose."""
    return OrientedRect((pose.x, pose.y), (p.body_length / 2, p.body_width / 2), pose.theta)
