"""Hybrid A* baseline: graph search over discretized (x, y, heading) cells with
continuous poses retained per cell, expanded by bicycle-model motion
primitives at fixed speed in both directions.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .geometry import normalize_angle, rect_corners, sat_corners_collide
from .scenarios import ScenarioSpec
from .vehicle import ControlInput, Pose, VehicleParams, VehicleState, step_kinematics

TWO_PI = 2.0 * math.pi


class NoPathError(Exception):
    """Open set exhausted or expansion budget hit: infeasible or under-resolved."""


@dataclass(frozen=True)
class SearchConfig:
    xy_resolution: float = 0.5
    theta_bins: int = 72
    primitive_arc_length: float = 1.0
    steer_set: tuple[float, ...] | None = None  # None: (-max_steer, 0, +max_steer)
    directions: tuple[int, ...] = (1, -1)
    reverse_penalty: float = 1.5       # multiplies reverse arc length
    direction_switch_penalty: float = 1.0
    steer_penalty: float = 0.1         # flat, per turning primitive
    goal_tolerance: tuple[float, float] = (0.5, math.radians(15.0))
    max_expansions: int = 50_000
    primitive_speed: float = 1.0
    collision_spacing: float = 0.1

    def __post_init__(self) -> None:
        if self.xy_resolution <= 0.0 or self.primitive_arc_length <= 0.0:
            raise ValueError("resolutions must be positive")
        if self.theta_bins < 8:
            raise ValueError("theta_bins must be at least 8")


@dataclass(frozen=True)
class PlanResult:
    path: list[tuple[Pose, int]]  # anchor (start, 0), then one (pose, direction) per primitive
    steers: tuple[float, ...]     # steer per primitive, aligned with path[1:]
    cost: float
    expansions: int
    planning_time: float


def heuristic(pose: Pose, goal: Pose,
              min_turn_radius: float = VehicleParams().min_turn_radius) -> float:
    """Admissible path-length lower bound: straight-line distance vs the arc
    needed to rotate the heading at the minimum turning radius."""
    d = math.hypot(goal.x - pose.x, goal.y - pose.y)
    dth = abs(normalize_angle(goal.theta - pose.theta))
    return max(d, min_turn_radius * dth)


def _primitive_offsets(cfg: SearchConfig, vehicle: VehicleParams
                       ) -> list[tuple[int, float, np.ndarray]]:
    """Integrate each (direction, steer) primitive once from the origin pose.

    The kinematics are SE(2)-equivariant, so per-node successors are rigid
    transforms of these offsets. Rows are substep (dx, dy, dtheta) at
    collision_spacing granularity, ending at the primitive endpoint.
    """
    steers = cfg.steer_set if cfg.steer_set is not None else (
        -vehicle.max_steer, 0.0, vehicle.max_steer)
    n_sub = max(1, math.ceil(cfg.primitive_arc_length / cfg.collision_spacing))
    dt = cfg.primitive_arc_length / cfg.primitive_speed / n_sub
    out = []
    for direction in cfg.directions:
        for steer in steers:
            state = VehicleState(Pose(0.0, 0.0, 0.0), direction * cfg.primitive_speed)
            rows = np.empty((n_sub, 3))
            u = ControlInput(steer, 0.0)
            for i in range(n_sub):
                state = step_kinematics(state, u, vehicle, dt)
                rows[i] = (state.pose.x, state.pose.y, state.pose.theta)
            out.append((direction, steer, rows))
    return out


class _Primitive:
    """One (direction, steer) motion primitive with precomputed substep body
    corners in the node frame, so expansion needs a single rigid transform."""

    def __init__(self, direction: int, steer: float, rows: np.ndarray,
                 vehicle: VehicleParams):
        self.direction = direction
        self.steer = steer
        self.rows = rows
        self.end = rows[-1]
        half_l, half_w = vehicle.body_length / 2, vehicle.body_width / 2
        local = np.array([(half_l, half_w), (-half_l, half_w),
                          (-half_l, -half_w), (half_l, -half_w)])
        n = len(rows)
        corners = np.empty((n, 4, 2))
        for i, (dx, dy, dth) in enumerate(rows):
            c, s = math.cos(dth), math.sin(dth)
            rot = np.array([(c, -s), (s, c)])
            corners[i] = local @ rot.T + (dx, dy)
        self.corners = corners.reshape(-1, 2)  # (n*4, 2)
        self.centers = rows[:, :2]


class _CollisionChecker:
    """Batched substep collision tests for one scenario."""

    def __init__(self, spec: ScenarioSpec, vehicle: VehicleParams):
        self.lot = spec.lot
        lot_c, lot_s = math.cos(spec.lot.heading), math.sin(spec.lot.heading)
        self._lot_rot = np.array([(lot_c, lot_s), (-lot_s, lot_c)])
        self._lot_center = np.asarray(spec.lot.center)
        self._lot_half = np.asarray(spec.lot.half_extents)
        self.obstacles = [(ob.corners(), np.asarray(ob.center), ob.bounding_radius())
                          for ob in spec.obstacles]
        self.body_radius = math.hypot(vehicle.body_length / 2, vehicle.body_width / 2)

    def primitive_free(self, prim: _Primitive, x: float, y: float,
                       cos_t: float, sin_t: float) -> bool:
        rot = np.array([(cos_t, -sin_t), (sin_t, cos_t)])
        corners = prim.corners @ rot.T
        corners[:, 0] += x
        corners[:, 1] += y
        in_lot = np.abs((corners - self._lot_center) @ self._lot_rot.T) <= self._lot_half
        if not in_lot.all():
            return False
        if not self.obstacles:
            return True
        centers = prim.centers @ rot.T
        centers[:, 0] += x
        centers[:, 1] += y
        for ob_corners, ob_center, ob_radius in self.obstacles:
            d2 = ((centers - ob_center) ** 2).sum(axis=1)
            reach = self.body_radius + ob_radius
            for k in np.flatnonzero(d2 <= reach * reach):
                if sat_corners_collide(corners[4 * k: 4 * k + 4], ob_corners):
                    return False
        return True

    def pose_free(self, x: float, y: float, theta: float,
                  half_l: float, half_w: float) -> bool:
        corners = rect_corners(x, y, half_l, half_w, theta)
        in_lot = np.abs((corners - self._lot_center) @ self._lot_rot.T) <= self._lot_half
        if not in_lot.all():
            return False
        for ob_corners, ob_center, ob_radius in self.obstacles:
            if math.hypot(x - ob_center[0], y - ob_center[1]) > self.body_radius + ob_radius:
                continue
            if sat_corners_collide(corners, ob_corners):
                return False
        return True


def plan(start: Pose, goal: Pose, spec: ScenarioSpec, cfg: SearchConfig | None = None,
         vehicle: VehicleParams | None = None) -> PlanResult:
    """A* over (x, y, theta) cells from start to within goal_tolerance of goal.

    Deterministic: ties in the open list break on (f, g, insertion index).
    Raises NoPathError when the open set runs dry or max_expansions is hit.
    """
    cfg = cfg or SearchConfig()
    vehicle = vehicle or VehicleParams()
    t0 = time.perf_counter()

    half_l, half_w = vehicle.body_length / 2, vehicle.body_width / 2
    checker = _CollisionChecker(spec, vehicle)
    if not checker.pose_free(start.x, start.y, start.theta, half_l, half_w):
        raise ValueError("start pose is in collision")

    pos_tol, ang_tol = cfg.goal_tolerance

    def at_goal(x: float, y: float, theta: float) -> bool:
        return (math.hypot(x - goal.x, y - goal.y) <= pos_tol
                and abs(normalize_angle(theta - goal.theta)) <= ang_tol)

    def cell_of(x: float, y: float, theta: float) -> tuple[int, int, int]:
        k = int((theta % TWO_PI) / TWO_PI * cfg.theta_bins) % cfg.theta_bins
        return (math.floor(x / cfg.xy_resolution), math.floor(y / cfg.xy_resolution), k)

    if at_goal(start.x, start.y, start.theta):
        return PlanResult([], (), 0.0, 0, time.perf_counter() - t0)

    primitives = [_Primitive(d, s, rows, vehicle)
                  for d, s, rows in _primitive_offsets(cfg, vehicle)]
    r_min = vehicle.min_turn_radius

    # node records: (x, y, theta, direction, steer, g, parent_index)
    nodes: list[tuple] = [(start.x, start.y, start.theta, 0, 0.0, 0.0, -1)]
    best_g: dict[tuple[int, int, int], float] = {cell_of(start.x, start.y, start.theta): 0.0}
    counter = 0
    h0 = heuristic(start, goal, r_min)
    open_heap: list[tuple[float, float, int, int]] = [(h0, 0.0, counter, 0)]
    expansions = 0

    goal_index = -1
    while open_heap:
        f, g, _, idx = heapq.heappop(open_heap)
        nx, ny, ntheta, ndir, _, ng, _ = nodes[idx]
        if at_goal(nx, ny, ntheta):
            goal_index = idx
            break
        if g > best_g.get(cell_of(nx, ny, ntheta), math.inf) + 1e-12:
            continue  # superseded by a cheaper route into this cell
        expansions += 1
        if expansions > cfg.max_expansions:
            raise NoPathError(f"expansion budget {cfg.max_expansions} exhausted")
        cos_t, sin_t = math.cos(ntheta), math.sin(ntheta)
        for prim in primitives:
            direction, steer = prim.direction, prim.steer
            step_cost = cfg.primitive_arc_length * (
                cfg.reverse_penalty if direction < 0 else 1.0)
            if ndir != 0 and direction != ndir:
                step_cost += cfg.direction_switch_penalty
            if steer != 0.0:
                step_cost += cfg.steer_penalty
            new_g = g + step_cost
            px = nx + cos_t * prim.end[0] - sin_t * prim.end[1]
            py = ny + sin_t * prim.end[0] + cos_t * prim.end[1]
            end_theta = normalize_angle(ntheta + prim.end[2])
            hits_goal = at_goal(px, py, end_theta)
            cell = cell_of(px, py, end_theta)
            known = best_g.get(cell)
            if known is not None and known <= new_g + 1e-12 and not hits_goal:
                continue  # goal-window endpoints survive cell pruning
            if not checker.primitive_free(prim, nx, ny, cos_t, sin_t):
                continue
            if known is None or new_g < known:
                best_g[cell] = new_g
            nodes.append((px, py, end_theta, direction, steer, new_g, idx))
            counter += 1
            h = heuristic(Pose(px, py, end_theta), goal, r_min)
            heapq.heappush(open_heap, (new_g + h, new_g, counter, len(nodes) - 1))
    if goal_index < 0:
        raise NoPathError("open set exhausted: goal unreachable at this resolution")

    chain = []
    idx = goal_index
    while idx >= 0:
        chain.append(nodes[idx])
        idx = nodes[idx][6]
    chain.reverse()
    path = [(Pose(n[0], n[1], n[2]), n[3]) for n in chain]
    steers = tuple(n[4] for n in chain[1:])
    return PlanResult(path, steers, nodes[goal_index][5], expansions,
                      time.perf_counter() - t0)


def interpolate_path(result: PlanResult, cfg: SearchConfig | None = None,
                     vehicle: VehicleParams | None = None
                     ) -> list[tuple[float, float, float, int]]:
    """Dense (x, y, theta, direction) samples along each primitive of a plan."""
    cfg = cfg or SearchConfig()
    vehicle = vehicle or VehicleParams()
    if not result.path:
        return []
    pts = [(result.path[0][0].x, result.path[0][0].y, result.path[0][0].theta, 0)]
    primitives = {(d, s): rows for d, s, rows in _primitive_offsets(cfg, vehicle)}
    for (pose, direction), steer in zip(result.path[1:], result.steers):
        prev = pts[-1]
        cos_t, sin_t = math.cos(prev[2]), math.sin(prev[2])
        for dx, dy, dth in primitives[(direction, steer)]:
            pts.append((prev[0] + cos_t * dx - sin_t * dy,
                        prev[1] + sin_t * dx + cos_t * dy,
                        normalize_angle(prev[2] + dth), direction))
        # snap the endpoint to the stored pose (guards drift accumulation)
        pts[-1] = (pose.x, pose.y, pose.theta, direction)
    return pts


def validate_path(path: list[tuple[Pose, int]], spec: ScenarioSpec,
                  cfg: SearchConfig | None = None, vehicle: VehicleParams | None = None,
                  steers: tuple[float, ...] | None = None) -> bool:
    """True iff every primitive, interpolated at collision_spacing, keeps the
    footprint inside the lot and clear of all obstacles.

    When per-primitive steers are not supplied they are recovered by matching
    each consecutive pose pair against the primitive set.
    """
    cfg = cfg or SearchConfig()
    vehicle = vehicle or VehicleParams()
    if not path:
        return True
    primitives = _primitive_offsets(cfg, vehicle)
    half_l, half_w = vehicle.body_length / 2, vehicle.body_width / 2

    def pose_free(x: float, y: float, theta: float) -> bool:
        corners = rect_corners(x, y, half_l, half_w, theta)
        if not spec.lot.contains_points(corners).all():
            return False
        return not any(sat_corners_collide(corners, ob.corners()) for ob in spec.obstacles)

    if not pose_free(path[0][0].x, path[0][0].y, path[0][0].theta):
        return False
    for i, (pose, direction) in enumerate(path[1:]):
        prev = path[i][0]
        cos_t, sin_t = math.cos(prev.theta), math.sin(prev.theta)
        candidates = primitives
        if steers is not None:
            candidates = [p for p in primitives
                          if p[0] == direction and p[1] == steers[i]]
        rows = None
        for d, s, cand in candidates:
            if d != direction:
                continue
            ex = prev.x + cos_t * cand[-1, 0] - sin_t * cand[-1, 1]
            ey = prev.y + sin_t * cand[-1, 0] + cos_t * cand[-1, 1]
            eth = normalize_angle(prev.theta + cand[-1, 2])
            if (math.hypot(ex - pose.x, ey - pose.y) < 1e-6
                    and abs(normalize_angle(eth - pose.theta)) < 1e-6):
                rows = cand
                break
        if rows is None:
            return False  # consecutive poses not connected by a single primitive
        for dx, dy, dth in rows:
            if not pose_free(prev.x + cos_t * dx - sin_t * dy,
                             prev.y + sin_t * dx + cos_t * dy,
                             prev.theta + dth):
                return False
    return True
