"""Planning-time comparison: hybrid A* search vs a single policy rollout.

The rollout uses an untrained policy here (timing is architecture-bound, not
weight-bound); with a trained checkpoint use the CLI instead:

    parksac bench --checkpoint runs/perp/final.ckpt --runs 20

Run:  python demos/06_benchmark.py
"""

import statistics
import time

import numpy as np

from parksac import VehicleParams, make_scenario
from parksac.hybrid_astar import NoPathError, plan
from parksac.sac import SacConfig, build_env, init_train_state, rollout_deterministic
from parksac.scenarios import sample_start

vehicle = VehicleParams()
cfg = SacConfig(seed=0)
state = init_train_state(cfg, build_env("mixed", cfg).obs_dim, (vehicle.max_steer, 1.0))

print(f"{'case':14s} {'hybrid A* median':>18s} {'policy rollout median':>22s}")
for kind in ("parallel", "perpendicular", "mixed"):
    spec = make_scenario(kind, seed=0, vehicle=vehicle)
    start = sample_start(spec, np.random.default_rng(0), vehicle)
    astar = []
    for _ in range(5):
        try:
            astar.append(plan(start.pose, spec.goal, spec).planning_time)
        except NoPathError:
            pass
    env = build_env(kind, cfg, noise_sigma=0.0)
    sac = []
    for _ in range(5):
        t0 = time.perf_counter()
        rollout_deterministic(state.policy, env, episode_seed=0)
        sac.append(time.perf_counter() - t0)
    a = f"{statistics.median(astar) * 1e3:10.1f} ms" if astar else "   NoPath"
    print(f"{kind:14s} {a:>18s} {statistics.median(sac) * 1e3:18.1f} ms")
