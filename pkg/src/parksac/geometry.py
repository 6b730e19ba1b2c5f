"""2D geometry primitives: angle wrapping, oriented rectangles, SAT collision, ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    r = a % TWO_PI  # [0, 2*pi), sign of divisor
    if r > math.pi:
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle given by center, half extents along its local axes, and heading."""

    center: tuple[float, float]
    half_extents: tuple[float, float]
    heading: float = 0.0

    def __post_init__(self) -> None:
        hx, hy = self.half_extents
        if not (hx > 0.0 and hy > 0.0):
            raise ValueError(f"half_extents must be strictly positive, got {self.half_extents}")

    def corners(self) -> np.ndarray:
        """Corner coordinates as a (4, 2) array, counter-clockwise from front-left."""
        return rect_corners(self.center[0], self.center[1], self.half_extents[0],
                            self.half_extents[1], self.heading)

    def bounding_radius(self) -> float:
        return math.hypot(self.half_extents[0], self.half_extents[1])

    def contains_point(self, x: float, y: float) -> bool:
        """Closed-set membership test."""
        dx = x - self.center[0]
        dy = y - self.center[1]
        c, s = math.cos(self.heading), math.sin(self.heading)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        return abs(lx) <= self.half_extents[0] and abs(ly) <= self.half_extents[1]

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized closed-set membership for an (N, 2) array of points."""
        d = np.asarray(pts, dtype=float) - self.center
        c, s = math.cos(self.heading), math.sin(self.heading)
        lx = c * d[:, 0] + s * d[:, 1]
        ly = -s * d[:, 0] + c * d[:, 1]
        return (np.abs(lx) <= self.half_extents[0]) & (np.abs(ly) <= self.half_extents[1])

    def edges(self) -> np.ndarray:
        """Edge segments as a (4, 2, 2) array of (start, end) pairs."""
        c = self.corners()
        return np.stack([c, np.roll(c, -1, axis=0)], axis=1)


def rect_corners(cx: float, cy: float, hx: float, hy: float, heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    # CCW: front-left, rear-left, rear-right, front-right (local +x forward)
    local = ((hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy))
    out = np.empty((4, 2))
    for i, (lx, ly) in enumerate(local):
        out[i, 0] = cx + c * lx - s * ly
        out[i, 1] = cy + s * lx + c * ly
    return out


def sat_corners_collide(ca: np.ndarray, cb: np.ndarray) -> bool:
    """Separating-axis test on two convex quads given as (4, 2) corner arrays.

    Closed-set semantics: boundary contact counts as intersection.
    """
    for corners in (ca, cb):
        for i in range(2):  # two unique edge directions per rectangle
            ex = corners[i + 1, 0] - corners[i, 0]
            ey = corners[i + 1, 1] - corners[i, 1]
            # outward normal of the edge
            ax, ay = -ey, ex
            pa = ca @ (ax, ay)
            pb = cb @ (ax, ay)
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def rect_collision(a: OrientedRect, b: OrientedRect) -> bool:
    """True iff the closed rectangles intersect (separating-axis test)."""
    dx = b.center[0] - a.center[0]
    dy = b.center[1] - a.center[1]
    if math.hypot(dx, dy) > a.bounding_radius() + b.bounding_radius():
        return False
    return sat_corners_collide(a.corners(), b.corners())


def sat_overlap_margin(a: OrientedRect, b: OrientedRect) -> float:
    """Signed penetration depth along the worst SAT axis.

    Positive: rectangles overlap by at least this much on every axis.
    Negative: a separating axis exists with this gap.
    """
    ca, cb = a.corners(), b.corners()
    margin = math.inf
    for corners in (ca, cb):
        for i in range(2):
            ex = corners[i + 1, 0] - corners[i, 0]
            ey = corners[i + 1, 1] - corners[i, 1]
            n = math.hypot(ex, ey)
            ax, ay = -ey / n, ex / n
            pa = ca @ (ax, ay)
            pb = cb @ (ax, ay)
            margin = min(margin, min(pa.max() - pb.min(), pb.max() - pa.min()))
    return margin


def rect_inside(inner: OrientedRect, outer: OrientedRect) -> bool:
    """True iff `inner` lies entirely within convex `outer` (corner containment)."""
    return bool(outer.contains_points(inner.corners()).all())


def ray_distances(origin: np.ndarray, directions: np.ndarray, segments: np.ndarray,
                  max_range: float) -> np.ndarray:
    """First-hit distance of each ray against a segment soup.

    origin: (2,); directions: (K, 2) unit vectors; segments: (M, 2, 2).
    Returns (K,) distances capped at max_range.
    """
    if segments.size == 0:
        return np.full(len(directions), max_range)
    p = segments[:, 0, :]                      # (M, 2)
    e = segments[:, 1, :] - segments[:, 0, :]  # (M, 2)
    rel = p - origin                           # (M, 2)
    # solve origin + t*d = p + s*e for each (ray, segment) pair
    denom = directions[:, 0, None] * e[None, :, 1] - directions[:, 1, None] * e[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel[None, :, 0] * e[None, :, 1] - rel[None, :, 1] * e[None, :, 0]) / denom
        s = (rel[None, :, 0] * directions[:, 1, None]
             - rel[None, :, 1] * directions[:, 0, None]) / denom
    valid = (np.abs(denom) > 1e-12) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
    t = np.where(valid, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)
