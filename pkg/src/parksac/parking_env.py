"""Episodic parking MDP: reset/step semantics, observations, reward, termination."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import OrientedRect, normalize_angle, rect_collision, rect_inside
from .scenarios import ScenarioSpec, advance_obstacles, sample_start
from .sensors import LidarConfig, lidar_scan, rasterize_grid, scan_segments
from .vehicle import ControlInput, Pose, VehicleParams, VehicleState, footprint, step_kinematics


@dataclass(frozen=True)
class RewardWeights:
    # w1 is tuned so the collision penalty dominates the distance shaping
    # integrated over a full approach; larger values make early collision the
    # return-optimal policy.
    w1: float = 0.25  # distance to goal
    w2: float = 0.5   # heading misalignment
    w3: float = 100.0  # collision penalty
    w4: float = 0.01  # per-step time penalty

    def __post_init__(self) -> None:
        if min(self.w1, self.w2, self.w3, self.w4) < 0.0:
            raise ValueError("reward weights must be nonnegative")


@dataclass(frozen=True)
class SuccessTolerance:
    pos_tol: float = 0.3
    ang_tol: float = math.radians(10.0)
    speed_tol: float = 0.1

    def __post_init__(self) -> None:
        if min(self.pos_tol, self.ang_tol, self.speed_tol) <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class StepInfo:
    collision: bool
    success: bool
    dist: float
    dtheta: float
    t: int


@dataclass(frozen=True)
class StepResult:
    obs: np.ndarray
    reward: float
    done: bool
    info: StepInfo


def goal_errors(state: VehicleState, goal: Pose) -> tuple[float, float]:
    """Euclidean center distance and absolute wrapped heading error."""
    dist = math.hypot(state.pose.x - goal.x, state.pose.y - goal.y)
    dtheta = abs(normalize_angle(state.pose.theta - goal.theta))
    return dist, dtheta


def compute_reward(new_state: VehicleState, s_goal: Pose, collision: bool,
                   weights: RewardWeights) -> float:
    """Per-step reward: distance and alignment shaping, binary collision
    penalty, and a constant time cost."""
    dist, dtheta = goal_errors(new_state, s_goal)
    r = -weights.w1 * dist - weights.w2 * dtheta - weights.w4
    if collision:
        r -= weights.w3
    return r


def check_success(state: VehicleState, target: OrientedRect, tol: SuccessTolerance,
                  vehicle: VehicleParams | None = None, margin: float = 0.5) -> bool:
    """Parked iff within all tolerances and the footprint sits inside the
    margin-inflated spot."""
    vehicle = vehicle or VehicleParams()
    goal = Pose(target.center[0], target.center[1], target.heading)
    dist, dtheta = goal_errors(state, goal)
    if dist > tol.pos_tol or dtheta > tol.ang_tol or abs(state.v) > tol.speed_tol:
        return False
    inflated = OrientedRect(target.center,
                            (target.half_extents[0] + margin, target.half_extents[1] + margin),
                            target.heading)
    return rect_inside(footprint(state.pose, vehicle), inflated)


@dataclass(frozen=True)
class EnvConfig:
    dt: float = 0.1
    max_steps: int = 1000
    obs_mode: str = "ego"          # "ego" (goal offsets in vehicle frame) or "raw"
    include_grid: bool = False
    grid_resolution: float = 1.0
    grid_size: int = 12
    success_margin: float = 0.5

    def __post_init__(self) -> None:
        if self.obs_mode not in ("ego", "raw"):
            raise ValueError("obs_mode must be 'ego' or 'raw'")
        if not self.dt > 0.0 or self.max_steps < 1:
            raise ValueError("dt must be positive and max_steps at least 1")


class ParkingEnv:
    """Single-owner episodic environment around one ScenarioSpec.

    Observation layout (ego mode, the default): [dx_ego/10, dy_ego/10,
    sin dtheta, cos dtheta, v/max_speed, lidar ranges / max_range], optionally
    followed by the flattened occupancy grid. Raw mode swaps the first four
    entries for [x/10, y/10, sin theta, cos theta].
    """

    def __init__(self, spec: ScenarioSpec, vehicle: VehicleParams | None = None,
                 lidar: LidarConfig | None = None, weights: RewardWeights | None = None,
                 tol: SuccessTolerance | None = None, cfg: EnvConfig | None = None):
        self.spec = spec
        self.vehicle = vehicle or VehicleParams()
        self.lidar = lidar or LidarConfig()
        self.weights = weights or RewardWeights()
        self.tol = tol or SuccessTolerance()
        self.cfg = cfg or EnvConfig()
        self._static_segments = (
            scan_segments(spec.obstacles, spec.lot) if not spec.obstacle_velocities else None
        )
        self.state: VehicleState | None = None
        self.t = 0
        self.done = True
        self._rng = np.random.default_rng(0)

    @property
    def obs_dim(self) -> int:
        n = 5 + self.lidar.n_rays
        if self.cfg.include_grid:
            n += self.cfg.grid_size * self.cfg.grid_size
        return n

    def reset(self, episode_seed: int) -> np.ndarray:
        """Place the vehicle at a sampled collision-free start with v = 0."""
        self._rng = np.random.default_rng(
            np.random.SeedSequence([self.spec.seed & 0x7FFFFFFF, episode_seed & 0x7FFFFFFF])
        )
        self.state = sample_start(self.spec, self._rng, self.vehicle)
        self.t = 0
        self.done = False
        return self.observe()

    def reset_to(self, state: VehicleState, episode_seed: int = 0) -> np.ndarray:
        """Test/demo hook: start an episode from a forced state."""
        self._rng = np.random.default_rng(
            np.random.SeedSequence([self.spec.seed & 0x7FFFFFFF, episode_seed & 0x7FFFFFFF])
        )
        self.state = state
        self.t = 0
        self.done = False
        return self.observe()

    def current_obstacles(self) -> tuple[OrientedRect, ...]:
        return advance_obstacles(self.spec, self.t * self.cfg.dt)

    def observe(self) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("reset() the environment before observing")
        s = self.state
        obstacles = self.current_obstacles()
        segments = self._static_segments
        if segments is None:
            segments = scan_segments(obstacles, self.spec.lot)
        ranges = lidar_scan(s, obstacles, self.spec.lot, self.lidar, self._rng,
                            segments=segments)
        if self.cfg.obs_mode == "ego":
            dx = self.spec.goal.x - s.pose.x
            dy = self.spec.goal.y - s.pose.y
            c, si = math.cos(s.pose.theta), math.sin(s.pose.theta)
            ex = c * dx + si * dy
            ey = -si * dx + c * dy
            dth = normalize_angle(self.spec.goal.theta - s.pose.theta)
            head = (ex / 10.0, ey / 10.0, math.sin(dth), math.cos(dth))
        else:
            head = (s.pose.x / 10.0, s.pose.y / 10.0,
                    math.sin(s.pose.theta), math.cos(s.pose.theta))
        parts = [np.array(head + (s.v / self.vehicle.max_speed,)),
                 ranges / self.lidar.max_range]
        if self.cfg.include_grid:
            grid = rasterize_grid(s, obstacles, self.spec.lot, self.cfg.grid_resolution,
                                  self.cfg.grid_size, self.cfg.grid_size)
            parts.append(grid.cells.astype(float).ravel())
        return np.concatenate(parts)

    def step(self, action: ControlInput) -> StepResult:
        """Advance one step; terminates on collision, success, or timeout."""
        if self.state is None or self.done:
            raise RuntimeError("step() called on a done or unreset episode")
        new_state = step_kinematics(self.state, action, self.vehicle, self.cfg.dt)
        self.state = new_state
        self.t += 1
        obstacles = self.current_obstacles()
        fp = footprint(new_state.pose, self.vehicle)
        collision = (not rect_inside(fp, self.spec.lot)
                     or any(rect_collision(fp, ob) for ob in obstacles))
        # collision first: a colliding final pose is never a success
        success = (not collision) and check_success(
            new_state, self.spec.target, self.tol, self.vehicle, self.cfg.success_margin
        )
        reward = compute_reward(new_state, self.spec.goal, collision, self.weights)
        self.done = collision or success or self.t >= self.cfg.max_steps
        dist, dtheta = goal_errors(new_state, self.spec.goal)
        info = StepInfo(collision, success, dist, dtheta, self.t)
        return StepResult(self.observe(), reward, self.done, info)
