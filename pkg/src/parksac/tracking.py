"""Pure-pursuit tracking of dense waypoint paths, with speed ramps that stop
the vehicle at the final point. Drives planner output through the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vehicle import ControlInput, VehicleParams, VehicleState


@dataclass(frozen=True)
class TrackerConfig:
    lookahead: float = 0.7
    cruise_speed: float = 1.0
    accel_margin: float = 0.8       # fraction of max_accel used when braking to a point
    switch_slowdown: float = 0.25   # how close to a segment end before direction switch
    finish_distance: float = 0.05
    stop_short: float = 0.0         # stop this much before the final segment's end;
                                    # the overrun points keep steering convergent


@dataclass
class _Segment:
    direction: int
    pts: np.ndarray         # (N, 2)
    cum: np.ndarray         # cumulative arc length, cum[0] = 0


def split_segments(points: list[tuple[float, float, float, int]]) -> list[_Segment]:
    """Group dense (x, y, theta, direction) points into same-direction runs."""
    segments: list[_Segment] = []
    run: list[tuple[float, float]] = []
    run_dir = 0
    for x, y, _, direction in points:
        if direction == 0 or direction == run_dir or not run:
            run.append((x, y))
            if direction != 0:
                run_dir = direction
        else:
            segments.append(_make_segment(run_dir or 1, run))
            run = [run[-1], (x, y)]
            run_dir = direction
    if len(run) > 1 or not segments:
        segments.append(_make_segment(run_dir or 1, run))
    return [s for s in segments if len(s.pts) > 1]


def _make_segment(direction: int, pts: list[tuple[float, float]]) -> _Segment:
    arr = np.asarray(pts, dtype=float)
    deltas = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(deltas)])
    return _Segment(direction, arr, cum)


class PathTracker:
    """Stateful controller: pure-pursuit steering toward a lookahead point on
    the active segment, bang-bang-ish speed control that brakes into segment
    ends (and to a standstill at the last one)."""

    def __init__(self, points: list[tuple[float, float, float, int]],
                 vehicle: VehicleParams | None = None, cfg: TrackerConfig | None = None):
        self.vehicle = vehicle or VehicleParams()
        self.cfg = cfg or TrackerConfig()
        self.segments = split_segments(points)
        if not self.segments:
            raise ValueError("path has no usable segments")
        self.seg_idx = 0
        self._ptr = 0

    @property
    def finished(self) -> bool:
        return self.seg_idx >= len(self.segments)

    def _nearest(self, seg: _Segment, x: float, y: float) -> int:
        lo = max(0, self._ptr - 5)
        hi = min(len(seg.pts), self._ptr + 80)
        d = np.linalg.norm(seg.pts[lo:hi] - (x, y), axis=1)
        return lo + int(np.argmin(d))

    def action(self, state: VehicleState, dt: float) -> ControlInput:
        p = self.vehicle
        if self.finished:
            return ControlInput(0.0, float(np.clip(-state.v / (p.max_accel * dt), -1, 1)))
        seg = self.segments[self.seg_idx]
        x, y = state.pose.x, state.pose.y
        i = self._nearest(seg, x, y)
        self._ptr = i
        remaining = float(seg.cum[-1] - seg.cum[i])
        last_segment = self.seg_idx == len(self.segments) - 1
        if last_segment:
            remaining -= self.cfg.stop_short

        # advance to the next segment when this one is spent
        if remaining <= self.cfg.finish_distance or i == len(seg.pts) - 1:
            if last_segment:
                self.seg_idx += 1
                return self.action(state, dt)
            if abs(state.v) < 0.12:
                self.seg_idx += 1
                self._ptr = 0
                return self.action(state, dt)
            return ControlInput(0.0, float(np.clip(-state.v / (p.max_accel * dt), -1, 1)))

        # lookahead target along the segment
        target_arc = seg.cum[i] + self.cfg.lookahead
        j = int(np.searchsorted(seg.cum, target_arc))
        j = min(j, len(seg.pts) - 1)
        tx, ty = seg.pts[j]

        hx, hy = math.cos(state.pose.theta), math.sin(state.pose.theta)
        if seg.direction < 0:
            hx, hy = -hx, -hy
        dx, dy = tx - x, ty - y
        lateral = -hy * dx + hx * dy
        d2 = max(dx * dx + dy * dy, 1e-6)
        curvature = 2.0 * lateral / d2
        steer = math.atan(seg.direction * p.wheelbase * curvature)
        steer = max(-p.max_steer, min(p.max_steer, steer))

        brake_speed = math.sqrt(2.0 * self.cfg.accel_margin * p.max_accel
                                * max(remaining - self.cfg.finish_distance, 0.0))
        slow = brake_speed if (last_segment or remaining < 2.0) else self.cfg.cruise_speed
        v_target = seg.direction * min(self.cfg.cruise_speed, max(slow, 0.0))
        throttle = float(np.clip((v_target - state.v) / (p.max_accel * dt), -1.0, 1.0))
        return ControlInput(steer, throttle)
