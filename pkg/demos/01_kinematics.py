"""Bicycle-model basics: straight driving, constant-steer circles, and the
analytic turning radius.

Run:  python demos/01_kinematics.py
"""

import math

import numpy as np

from parksac import ControlInput, Pose, VehicleParams, VehicleState, step_kinematics

params = VehicleParams()
print(f"vehicle: wheelbase {params.wheelbase} m, body "
      f"{params.body_length} x {params.body_width} m, "
      f"max steer {math.degrees(params.max_steer):.0f} deg")

# accelerate straight from rest for 3 s, then coast
state = VehicleState(Pose(0.0, 0.0, 0.0), 0.0)
for _ in range(30):
    state = step_kinematics(state, ControlInput(0.0, 1.0), params, 0.1)
print(f"after 3 s full throttle: x = {state.pose.x:.2f} m, v = {state.v:.2f} m/s")

# constant steer at constant speed traces a circle of radius L / tan(delta)
delta = math.atan(params.wheelbase / 5.0)  # analytic radius: 5 m
state = VehicleState(Pose(0.0, 0.0, 0.0), 1.0)
pts = []
for _ in range(10_000):
    state = step_kinematics(state, ControlInput(delta, 0.0), params, 0.01)
    pts.append((state.pose.x, state.pose.y))
pts = np.asarray(pts)
radii = np.hypot(pts[:, 0], pts[:, 1] - 5.0)  # center sits at (0, R) for a left turn
print(f"steer {math.degrees(delta):.2f} deg -> radius "
      f"{radii.mean():.4f} m (analytic 5.0000), spread "
      f"{radii.min():.4f}..{radii.max():.4f}")

# reversing conserves the same geometry
state = VehicleState(Pose(0.0, 0.0, 0.0), -1.0)
for _ in range(100):
    state = step_kinematics(state, ControlInput(delta, 0.0), params, 0.01)
print(f"reverse arc endpoint: ({state.pose.x:.3f}, {state.pose.y:.3f}), "
      f"heading {math.degrees(state.pose.theta):.1f} deg")
