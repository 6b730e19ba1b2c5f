"""The parking MDP: scenario layouts, a random-policy rollout, and the reward
decomposition along the way.

Run:  python demos/03_environment.py
"""

import math

import numpy as np

from parksac import ControlInput, ParkingEnv, make_scenario
from parksac.parking_env import compute_reward

for kind in ("parallel", "perpendicular", "mixed"):
    spec = make_scenario(kind, seed=0)
    print(f"{kind:14s} goal ({spec.goal.x:5.2f}, {spec.goal.y:5.2f}, "
          f"{math.degrees(spec.goal.theta):6.1f} deg), "
          f"{len(spec.obstacles)} obstacles")

spec = make_scenario("perpendicular", seed=0)
env = ParkingEnv(spec)
obs = env.reset(episode_seed=42)
print(f"\nobservation has {len(obs)} entries; first five {np.round(obs[:5], 3)}")

rng = np.random.default_rng(7)
ep_return = 0.0
while not env.done:
    action = ControlInput(float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-1, 1)))
    res = env.step(action)
    ep_return += res.reward
info = res.info
print(f"random policy: {info.t} steps, return {ep_return:.1f}, "
      f"collision={info.collision}, success={info.success}, "
      f"final dist {info.dist:.2f} m")

# the logged reward decomposes exactly per the reward definition
r = compute_reward(env.state, spec.goal, info.collision, env.weights)
print(f"recomputed final reward {r:.3f} == logged {res.reward:.3f}")
