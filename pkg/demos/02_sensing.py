"""Simulated sensing: noisy lidar rays and ego-centric occupancy grids.

Run:  python demos/02_sensing.py
"""

import numpy as np

from parksac import LidarConfig, Pose, VehicleState, lidar_scan, make_scenario, rasterize_grid

spec = make_scenario("perpendicular", seed=0)
state = VehicleState(Pose(spec.goal.x, spec.goal.y + 5.0, -np.pi / 2), 0.0)

clean = lidar_scan(state, spec.obstacles, spec.lot,
                   LidarConfig(n_rays=16, noise_sigma=0.0), np.random.default_rng(0))
noisy = lidar_scan(state, spec.obstacles, spec.lot,
                   LidarConfig(n_rays=16, noise_sigma=0.05), np.random.default_rng(0))
print("ray   clean   noisy (5 cm std)")
for i, (c, n) in enumerate(zip(clean, noisy)):
    print(f"{i:3d}  {c:6.2f}  {n:6.2f}")

grid = rasterize_grid(state, spec.obstacles, spec.lot, resolution=1.0,
                      width=16, height=16)
print("\noccupancy grid (vehicle centered, forward = right):")
for row in grid.cells[::-1]:
    print("".join("#" if c else "." for c in row))
