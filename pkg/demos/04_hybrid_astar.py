"""Hybrid A* baseline: plan parking paths on all three scenario kinds, check
them with the interpolated-collision validator, and render one to SVG.

Run:  python demos/04_hybrid_astar.py     (writes demo_plan.svg)
"""

import numpy as np

from parksac import VehicleParams, make_scenario
from parksac.hybrid_astar import interpolate_path, plan, validate_path
from parksac.render import render_svg
from parksac.scenarios import sample_start
from parksac.trajectory import TrajectoryRow

vehicle = VehicleParams()
for kind in ("parallel", "perpendicular", "mixed"):
    spec = make_scenario(kind, seed=3, vehicle=vehicle)
    start = sample_start(spec, np.random.default_rng(3), vehicle)
    result = plan(start.pose, spec.goal, spec)
    reverses = sum(1 for _, d in result.path[1:] if d < 0)
    print(f"{kind:14s} cost {result.cost:6.2f}  primitives {len(result.path) - 1:3d} "
          f"({reverses} reverse)  expansions {result.expansions:5d}  "
          f"time {result.planning_time * 1e3:7.1f} ms  "
          f"valid={validate_path(result.path, spec, steers=result.steers)}")

spec = make_scenario("perpendicular", seed=3, vehicle=vehicle)
start = sample_start(spec, np.random.default_rng(3), vehicle)
result = plan(start.pose, spec.goal, spec)
rows = [TrajectoryRow(i, x, y, th, float(d))
        for i, (x, y, th, d) in enumerate(interpolate_path(result))]
render_svg(rows, spec, "demo_plan.svg")
print("wrote demo_plan.svg")
