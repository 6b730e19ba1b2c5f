"""Autonomous-parking trajectory generation.

A self-contained stack: a kinematic parking simulator with simulated sensing,
a from-scratch soft actor-critic trainer over an entropy-regularized
objective, a hybrid A* baseline planner, and a CLI for training, evaluation,
benchmarking, and rendering.
"""

from .geometry import OrientedRect, normalize_angle, rect_collision
from .vehicle import ControlInput, Pose, VehicleParams, VehicleState, step_kinematics
from .sensors import LidarConfig, OccupancyGrid, lidar_scan, rasterize_grid
from .scenarios import ScenarioSpec, make_scenario
from .parking_env import (
    EnvConfig,
    ParkingEnv,
    RewardWeights,
    StepResult,
    SuccessTolerance,
    check_success,
    compute_reward,
)
from .nets import AdamState, GaussianPolicy, Mlp, TwinCritic, adam_step, polyak_update
from .sac import EvalReport, ReplayBuffer, SacConfig, Transition, evaluate, train
from .hybrid_astar import NoPathError, PlanResult, SearchConfig, heuristic, plan, validate_path

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ControlInput",
    "EnvConfig",
    "EvalReport",
    "GaussianPolicy",
    "LidarConfig",
    "Mlp",
    "NoPathError",
    "OccupancyGrid",
    "OrientedRect",
    "ParkingEnv",
    "PlanResult",
    "Pose",
    "ReplayBuffer",
    "RewardWeights",
    "SacConfig",
    "ScenarioSpec",
    "SearchConfig",
    "StepResult",
    "SuccessTolerance",
    "Transition",
    "TwinCritic",
    "VehicleParams",
    "VehicleState",
    "adam_step",
    "check_success",
    "compute_reward",
    "evaluate",
    "heuristic",
    "lidar_scan",
    "make_scenario",
    "normalize_angle",
    "plan",
    "polyak_update",
    "rasterize_grid",
    "rect_collision",
    "step_kinematics",
    "train",
    "validate_path",
    "__version__",
]
