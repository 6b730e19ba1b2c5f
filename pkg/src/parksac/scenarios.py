"""Parking-lot scenario generators: parallel, perpendicular, and mixed layouts.

Every scenario lives in a 20m x 20m lot with a 4m x 2m target spot. Layout
geometry, obstacle placement, and the start-pose sampling region all derive
deterministically from the scenario seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import OrientedRect, rect_collision, rect_inside
from .vehicle import Pose, VehicleParams, VehicleState, footprint

KINDS = ("parallel", "perpendicular", "mixed")

LOT_HALF = 10.0
SPOT_HALF_LENGTH = 2.0  # 4 m x 2 m target spot
SPOT_HALF_WIDTH = 1.0
WALL_MARGIN = 0.5  # curb gap between wall-adjacent spots and the lot boundary
STALL_PITCH = 2.75  # center spacing of adjacent perpendicular stalls


class ScenarioError(Exception):
    """Raised when a seed cannot produce a usable layout."""


@dataclass(frozen=True)
class StartRegion:
    """Uniform sampling ranges for the initial pose; v always starts at 0."""

    x: tuple[float, float]
    y: tuple[float, float]
    theta: tuple[float, float]

    def sample(self, rng: np.random.Generator) -> Pose:
        return Pose(rng.uniform(*self.x), rng.uniform(*self.y), rng.uniform(*self.theta))


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    lot: OrientedRect
    target: OrientedRect
    goal: Pose
    obstacles: tuple[OrientedRect, ...]
    start_region: StartRegion
    seed: int
    obstacle_velocities: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not rect_inside(self.target, self.lot):
            raise ValueError("target spot must lie inside the lot")
        if self.obstacle_velocities and len(self.obstacle_velocities) != len(self.obstacles):
            raise ValueError("obstacle_velocities must match obstacles")


def _lot() -> OrientedRect:
    return OrientedRect((0.0, 0.0), (LOT_HALF, LOT_HALF), 0.0)


def _car_rect(x: float, y: float, heading: float, vehicle: VehicleParams) -> OrientedRect:
    return OrientedRect((x, y), (vehicle.body_length / 2, vehicle.body_width / 2), heading)


def start_is_free(pose: Pose, spec: ScenarioSpec, vehicle: VehicleParams,
                  margin: float = 0.0) -> bool:
    fp = footprint(pose, vehicle)
    if margin > 0.0:
        fp = OrientedRect(fp.center, (fp.half_extents[0] + margin,
                                      fp.half_extents[1] + margin), fp.heading)
    if not rect_inside(fp, spec.lot):
        return False
    return not any(rect_collision(fp, ob) for ob in spec.obstacles)


START_CLEARANCE = 0.3  # spawns keep this much room around the body


def sample_start(spec: ScenarioSpec, rng: np.random.Generator, vehicle: VehicleParams,
                 max_tries: int = 200, margin: float = START_CLEARANCE) -> VehicleState:
    """Draw a collision-free start inside the lot (with clearance), or fail
    after max_tries."""
    for _ in range(max_tries):
        pose = spec.start_region.sample(rng)
        if start_is_free(pose, spec, vehicle, margin):
            return VehicleState(pose, 0.0)
    raise ScenarioError(
        f"no collision-free start found in {max_tries} draws (kind={spec.kind}, seed={spec.seed})"
    )


def _perpendicular(rng: np.random.Generator, seed: int, vehicle: VehicleParams) -> ScenarioSpec:
    # spot nose-in near the bottom wall, short edge facing the aisle,
    # neighbor cars parked one slot pitch to each side
    x0 = rng.uniform(-4.0, 4.0)
    goal = Pose(x0, -LOT_HALF + WALL_MARGIN + SPOT_HALF_LENGTH, -math.pi / 2)
    target = OrientedRect((goal.x, goal.y), (SPOT_HALF_LENGTH, SPOT_HALF_WIDTH), goal.theta)
    obstacles = (
        _car_rect(x0 - STALL_PITCH, goal.y, -math.pi / 2, vehicle),
        _car_rect(x0 + STALL_PITCH, goal.y, -math.pi / 2, vehicle),
    )
    start = StartRegion(
        x=(x0 - 2.0, x0 + 2.0),
        y=(-2.5, 0.0),
        theta=(-math.pi / 2 - 0.5, -math.pi / 2 + 0.5),
    )
    return ScenarioSpec("perpendicular", _lot(), target, goal, obstacles, start, seed)


def _parallel(rng: np.random.Generator, seed: int, vehicle: VehicleParams) -> ScenarioSpec:
    # spot long edge parallel to the bottom wall, flanked by parked cars
    x0 = rng.uniform(-3.0, 3.0)
    goal = Pose(x0, -LOT_HALF + WALL_MARGIN + SPOT_HALF_WIDTH, 0.0)
    target = OrientedRect((goal.x, goal.y), (SPOT_HALF_LENGTH, SPOT_HALF_WIDTH), 0.0)
    gap = 5.75
    obstacles = (
        _car_rect(x0 - gap, goal.y, 0.0, vehicle),
        _car_rect(x0 + gap, goal.y, 0.0, vehicle),
    )
    start = StartRegion(
        x=(x0 - 2.0, x0 + 2.0),
        y=(-6.5, -4.5),
        theta=(-0.5, 0.5),
    )
    return ScenarioSpec("parallel", _lot(), target, goal, obstacles, start, seed)


def _mixed(rng: np.random.Generator, seed: int, vehicle: VehicleParams,
           dynamic_obstacles: bool) -> ScenarioSpec:
    goal = Pose(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0),
                rng.uniform(-math.pi, math.pi))
    target = OrientedRect((goal.x, goal.y), (SPOT_HALF_LENGTH, SPOT_HALF_WIDTH), goal.theta)
    clearance = OrientedRect((goal.x, goal.y),
                             (SPOT_HALF_LENGTH + 2.0, SPOT_HALF_WIDTH + 2.0), goal.theta)
    n_obstacles = int(rng.integers(3, 9))
    obstacles: list[OrientedRect] = []
    attempts = 0
    while len(obstacles) < n_obstacles and attempts < 200:
        attempts += 1
        ob = OrientedRect(
            (rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)),
            (rng.uniform(0.4, 1.5), rng.uniform(0.4, 1.5)),
            rng.uniform(-math.pi, math.pi),
        )
        if rect_collision(ob, clearance):
            continue
        if any(rect_collision(ob, prev) for prev in obstacles):
            continue
        obstacles.append(ob)
    start = StartRegion(x=(-7.0, 7.0), y=(-7.0, 7.0), theta=(-math.pi, math.pi))
    velocities: tuple[tuple[float, float], ...] = ()
    if dynamic_obstacles and obstacles:
        velocities = tuple(
            (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) if i < 2 else (0.0, 0.0)
            for i in range(len(obstacles))
        )
    return ScenarioSpec("mixed", _lot(), target, goal, tuple(obstacles), start, seed,
                        obstacle_velocities=velocities)


def make_scenario(kind: str, seed: int, vehicle: VehicleParams | None = None,
                  dynamic_obstacles: bool = False) -> ScenarioSpec:
    """Build a deterministic scenario for the given kind and seed.

    Layouts that leave no collision-free start after internal resampling are
    rejected with ScenarioError.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    vehicle = vehicle or VehicleParams()
    for attempt in range(20):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        if kind == "perpendicular":
            spec = _perpendicular(rng, seed, vehicle)
        elif kind == "parallel":
            spec = _parallel(rng, seed, vehicle)
        else:
            spec = _mixed(rng, seed, vehicle, dynamic_obstacles)
        probe = np.random.default_rng(np.random.SeedSequence([seed, attempt, 1]))
        try:
            sample_start(spec, probe, vehicle, max_tries=50)
        except ScenarioError:
            continue
        return spec
    raise ScenarioError(f"seed {seed} produced no layout with a reachable start for {kind}")


def advance_obstacles(spec: ScenarioSpec, t: float) -> tuple[OrientedRect, ...]:
    """Obstacle rects at time t under the constant-velocity option."""
    if not spec.obstacle_velocities:
        return spec.obstacles
    return tuple(
        replace(ob, center=(ob.center[0] + vx * t, ob.center[1] + vy * t))
        for ob, (vx, vy) in zip(spec.obstacles, spec.obstacle_velocities)
    )
