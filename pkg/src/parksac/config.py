"""Run configuration: flat INI files with section headers, total precedence
(built-in default < file < flag override), and a resolved-value echo.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

from .hybrid_astar import SearchConfig
from .parking_env import EnvConfig, RewardWeights, SuccessTolerance
from .sac import SacConfig
from .sensors import LidarConfig
from .vehicle import VehicleParams


class ConfigError(Exception):
    """Invalid config file or override; message names the field."""


# every supported key with its built-in default, in echo order
DEFAULTS: dict[tuple[str, str], str] = {
    ("run", "seed"): "0",
    ("run", "scenario"): "perpendicular",
    ("sac", "episodes"): "3000",
    ("sac", "max_steps"): "1000",
    ("sac", "batch_size"): "128",
    ("sac", "gamma"): "0.99",
    ("sac", "noise_sigma"): "0.01",
    ("sac", "tau"): "0.05",
    ("sac", "lr"): "0.0003",
    ("sac", "buffer_capacity"): "1000000",
    ("sac", "warmup_steps"): "1000",
    ("sac", "updates_per_env_step"): "1",
    ("sac", "target_entropy"): "-2.0",
    ("sac", "initial_alpha"): "0.2",
    ("sac", "hidden"): "256,256,256",
    ("sac", "checkpoint_every"): "200",
    ("sac", "eval_every"): "50",
    ("sac", "eval_episodes"): "100",
    ("sac", "early_stop_success"): "0.8",
    ("sac", "early_stop_collision"): "0.05",
    ("vehicle", "wheelbase"): "2.5",
    ("vehicle", "body_length"): "4.0",
    ("vehicle", "body_width"): "1.8",
    ("vehicle", "max_steer_deg"): "30.0",
    ("vehicle", "max_accel"): "1.0",
    ("vehicle", "max_speed"): "2.0",
    ("lidar", "n_rays"): "16",
    ("lidar", "max_range"): "10.0",
    ("env", "dt"): "0.1",
    ("env", "obs_mode"): "ego",
    ("env", "include_grid"): "false",
    ("env", "grid_resolution"): "1.0",
    ("env", "grid_size"): "12",
    ("env", "success_margin"): "0.5",
    ("env", "dynamic_obstacles"): "false",
    ("reward", "w1"): "0.25",
    ("reward", "w2"): "0.5",
    ("reward", "w3"): "100.0",
    ("reward", "w4"): "0.01",
    ("tolerance", "pos_tol"): "0.3",
    ("tolerance", "ang_tol_deg"): "10.0",
    ("tolerance", "speed_tol"): "0.1",
    ("search", "xy_resolution"): "0.5",
    ("search", "theta_bins"): "72",
    ("search", "primitive_arc"): "1.0",
    ("search", "reverse_penalty"): "1.5",
    ("search", "switch_penalty"): "1.0",
    ("search", "steer_penalty"): "0.1",
    ("search", "goal_pos_tol"): "0.5",
    ("search", "goal_ang_tol_deg"): "15.0",
    ("search", "max_expansions"): "50000",
}


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def _parse_num(raw: str, conv, where: str):
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one run, plus the raw values for echoing."""

    seed: int
    scenario: str
    sac: SacConfig
    vehicle: VehicleParams
    lidar: LidarConfig
    env: EnvConfig
    search: SearchConfig
    dynamic_obstacles: bool
    values: dict

    def echo_text(self) -> str:
        lines = []
        section = None
        for (sec, key) in DEFAULTS:
            if sec != section:
                if section is not None:
                    lines.append("")
                lines.append(f"[{sec}]")
                section = sec
            lines.append(f"{key} = {self.values[(sec, key)]}")
        lines.append("")
        return "\n".join(lines)

    def write_echo(self, path: str | Path) -> None:
        Path(path).write_text(self.echo_text())


def load_values(config_path: str | Path | None = None,
                overrides: dict[str, str] | None = None) -> dict:
    """Merge defaults, an optional INI file, and `section.key` overrides."""
    values = dict(DEFAULTS)
    if config_path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(config_path)
        if not read:
            raise ConfigError(f"config file not found: {config_path}")
        for sec in parser.sections():
            for key, raw in parser.items(sec):
                if (sec, key) not in values:
                    raise ConfigError(f"unknown config key [{sec}] {key}")
                values[(sec, key)] = raw.strip()
    for dotted, raw in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        sec, key = dotted.split(".", 1)
        if (sec, key) not in values:
            raise ConfigError(f"unknown config key [{sec}] {key}")
        values[(sec, key)] = str(raw).strip()
    return values


def resolve(config_path: str | Path | None = None,
            overrides: dict[str, str] | None = None) -> RunConfig:
    """Build typed config objects from merged values, validating every field."""
    v = load_values(config_path, overrides)

    def num(sec, key, conv=float):
        return _parse_num(v[(sec, key)], conv, f"[{sec}] {key}")

    def boolean(sec, key):
        return _parse_bool(v[(sec, key)], f"[{sec}] {key}")

    seed = num("run", "seed", int)
    scenario = v[("run", "scenario")]
    if scenario not in ("parallel", "perpendicular", "mixed"):
        raise ConfigError(f"[run] scenario: unknown kind {scenario!r}")
    try:
        hidden = tuple(int(h) for h in v[("sac", "hidden")].split(","))
        weights = RewardWeights(num("reward", "w1"), num("reward", "w2"),
                                num("reward", "w3"), num("reward", "w4"))
        tol = SuccessTolerance(num("tolerance", "pos_tol"),
                               math.radians(num("tolerance", "ang_tol_deg")),
                               num("tolerance", "speed_tol"))
        sac = SacConfig(
            episodes=num("sac", "episodes", int),
            max_steps=num("sac", "max_steps", int),
            batch_size=num("sac", "batch_size", int),
            gamma=num("sac", "gamma"),
            noise_sigma=num("sac", "noise_sigma"),
            tau=num("sac", "tau"),
            lr=num("sac", "lr"),
            buffer_capacity=num("sac", "buffer_capacity", int),
            warmup_steps=num("sac", "warmup_steps", int),
            updates_per_env_step=num("sac", "updates_per_env_step", int),
            target_entropy=num("sac", "target_entropy"),
            initial_alpha=num("sac", "initial_alpha"),
            seed=seed,
            hidden=hidden,
            checkpoint_every=num("sac", "checkpoint_every", int),
            eval_every=num("sac", "eval_every", int),
            eval_episodes=num("sac", "eval_episodes", int),
            early_stop_success=num("sac", "early_stop_success"),
            early_stop_collision=num("sac", "early_stop_collision"),
            weights=weights,
            tol=tol,
        )
        vehicle = VehicleParams(
            wheelbase=num("vehicle", "wheelbase"),
            body_length=num("vehicle", "body_length"),
            body_width=num("vehicle", "body_width"),
            max_steer=math.radians(num("vehicle", "max_steer_deg")),
            max_accel=num("vehicle", "max_accel"),
            max_speed=num("vehicle", "max_speed"),
        )
        lidar = LidarConfig(
            n_rays=num("lidar", "n_rays", int),
            max_range=num("lidar", "max_range"),
            noise_sigma=sac.noise_sigma,
        )
        env = EnvConfig(
            dt=num("env", "dt"),
            max_steps=sac.max_steps,
            obs_mode=v[("env", "obs_mode")],
            include_grid=boolean("env", "include_grid"),
            grid_resolution=num("env", "grid_resolution"),
            grid_size=num("env", "grid_size", int),
            success_margin=num("env", "success_margin"),
        )
        search = SearchConfig(
            xy_resolution=num("search", "xy_resolution"),
            theta_bins=num("search", "theta_bins", int),
            primitive_arc_length=num("search", "primitive_arc"),
            reverse_penalty=num("search", "reverse_penalty"),
            direction_switch_penalty=num("search", "switch_penalty"),
            steer_penalty=num("search", "steer_penalty"),
            goal_tolerance=(num("search", "goal_pos_tol"),
                            math.radians(num("search", "goal_ang_tol_deg"))),
            max_expansions=num("search", "max_expansions", int),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        seed=seed, scenario=scenario, sac=sac, vehicle=vehicle, lidar=lidar,
        env=env, search=search, dynamic_obstacles=boolean("env", "dynamic_obstacles"),
        values=v,
    )
