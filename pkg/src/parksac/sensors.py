"""Simulated sensing: noisy 2D lidar and ego-centric occupancy grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import OrientedRect, ray_distances
from .vehicle import VehicleState


@dataclass(frozen=True)
class LidarConfig:
    n_rays: int = 16
    max_range: float = 10.0
    noise_sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.n_rays < 1:
            raise ValueError("n_rays must be at least 1")
        if not self.max_range > 0.0:
            raise ValueError("max_range must be positive")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class OccupancyGrid:
    resolution: float
    width: int
    height: int
    cells: np.ndarray  # (height, width), values 0 or 1


def scan_segments(obstacles: list[OrientedRect] | tuple[OrientedRect, ...],
                  lot: OrientedRect) -> np.ndarray:
    """Stack lot-wall and obstacle edges into one (M, 2, 2) segment soup."""
    parts = [lot.edges()]
    parts.extend(ob.edges() for ob in obstacles)
    return np.concatenate(parts, axis=0)


_RAY_UNIT_CACHE: dict[int, np.ndarray] = {}


def _ray_units(n_rays: int) -> np.ndarray:
    units = _RAY_UNIT_CACHE.get(n_rays)
    if units is None:
        angles = 2.0 * math.pi * np.arange(n_rays) / n_rays
        units = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        _RAY_UNIT_CACHE[n_rays] = units
    return units


def lidar_scan(state: VehicleState, obstacles: list[OrientedRect] | tuple[OrientedRect, ...],
               lot: OrientedRect, cfg: LidarConfig, rng: np.random.Generator,
               segments: np.ndarray | None = None) -> np.ndarray:
    """Cast n_rays beams CCW from the vehicle heading and return noisy ranges.

    Ray i points along theta + 2*pi*i/n_rays. Each return is the distance to
    the first obstacle or lot-wall hit, capped at max_range, plus an additive
    Gaussian draw, clamped back into [0, max_range]. Pass a precomputed
    `segments` soup to skip rebuilding it every step.
    """
    if segments is None:
        segments = scan_segments(obstacles, lot)
    unit = _ray_units(cfg.n_rays)
    c, s = math.cos(state.pose.theta), math.sin(state.pose.theta)
    directions = np.empty_like(unit)
    directions[:, 0] = c * unit[:, 0] - s * unit[:, 1]
    directions[:, 1] = s * unit[:, 0] + c * unit[:, 1]
    origin = np.array([state.pose.x, state.pose.y])
    ranges = ray_distances(origin, directions, segments, cfg.max_range)
    if cfg.noise_sigma > 0.0:
        ranges = ranges + rng.normal(0.0, cfg.noise_sigma, size=cfg.n_rays)
    return np.minimum(np.maximum(ranges, 0.0), cfg.max_range)


def rasterize_grid(state: VehicleState, obstacles: list[OrientedRect] | tuple[OrientedRect, ...],
                   lot: OrientedRect, resolution: float, width: int = 20,
                   height: int = 20) -> OccupancyGrid:
    """Binary occupancy raster centered on the vehicle, axes aligned to its heading.

    Grid columns run along the vehicle's forward axis, rows along its left
    axis. A cell is occupied iff its center lies inside any obstacle or
    outside the lot.
    """
    if not resolution > 0.0:
        raise ValueError("resolution must be positive")
    cols = (np.arange(width) - (width - 1) / 2.0) * resolution
    rows = (np.arange(height) - (height - 1) / 2.0) * resolution
    lx, ly = np.meshgrid(cols, rows)  # (height, width) local coords
    c, s = math.cos(state.pose.theta), math.sin(state.pose.theta)
    wx = state.pose.x + c * lx - s * ly
    wy = state.pose.y + s * lx + c * ly
    pts = np.stack([wx.ravel(), wy.ravel()], axis=1)
    occupied = ~lot.contains_points(pts)
    for ob in obstacles:
        occupied |= ob.contains_points(pts)
    cells = occupied.reshape(height, width).astype(np.uint8)
    return OccupancyGrid(resolution, width, height, cells)
