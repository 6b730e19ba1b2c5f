"""Command-line entry point.

Subcommands: train, eval, bench, render, plan. Exit codes: 0 success,
1 usage/config error, 2 I/O or corrupt-file error, 3 NoPath or an eval below
the requested success threshold.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .config import ConfigError, RunConfig, resolve
from .fileio import atomic_write_text
from .hybrid_astar import NoPathError, plan
from .render import render_svg
from .sac import (
    EVAL_EPISODE_SEED_BASE,
    EvalReport,
    build_env,
    evaluate,
    rollout_deterministic,
    train,
)
from .scenarios import ScenarioError, make_scenario, sample_start
from .trajectory import TrajectoryFormatError, load_trajectory_csv, save_trajectory_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NOPATH = 3

EVAL_HEADER = ("success_rate,collision_rate,mean_episode_steps,mean_return,"
               "mean_final_dist,mean_inference_time_per_episode")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        out[dotted.strip()] = value.strip()
    if getattr(args, "seed", None) is not None:
        out["run.seed"] = str(args.seed)
    if getattr(args, "scenario", None) is not None:
        out["run.scenario"] = args.scenario
    if getattr(args, "episodes", None) is not None:
        out["sac.episodes"] = str(args.episodes)
    return out


def _resolve(args: argparse.Namespace) -> RunConfig:
    return resolve(getattr(args, "config", None), _overrides(args))


def cmd_train(args: argparse.Namespace) -> int:
    rc = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rc.write_echo(out / "config_echo.ini")
    prior_metrics = None
    state = None
    if args.resume:
        state, _ = ckpt.load_checkpoint(args.resume)
        metrics_path = out / "metrics.csv"
        if metrics_path.exists():
            prior_metrics = metrics_path.read_text()
    state, _rows = train(rc.sac, rc.scenario, out_dir=out, vehicle=rc.vehicle,
                         lidar=rc.lidar, env_cfg=rc.env, state=state,
                         config_echo=rc.echo_text(), quiet=not args.verbose,
                         dynamic_obstacles=rc.dynamic_obstacles)
    if prior_metrics is not None:
        new_text = (out / "metrics.csv").read_text()
        body = new_text.split("\n", 1)[1] if "\n" in new_text else ""
        atomic_write_text(out / "metrics.csv", prior_metrics.rstrip("\n") + "\n" + body)
    print(f"trained through episode {state.episode}; outputs in {out}")
    return EXIT_OK


def _report_lines(report: EvalReport) -> list[str]:
    human = [
        f"  success rate        {report.success_rate:.3f}",
        f"  collision rate      {report.collision_rate:.3f}",
        f"  mean episode steps  {report.mean_episode_steps:.1f}",
        f"  mean return         {report.mean_return:.2f}",
        f"  mean final dist     {report.mean_final_dist:.3f} m",
        f"  mean inference time {report.mean_inference_time_per_episode * 1e3:.2f} ms/episode",
    ]
    row = (f"{report.success_rate!r},{report.collision_rate!r},"
           f"{report.mean_episode_steps!r},{report.mean_return!r},"
           f"{report.mean_final_dist!r},{report.mean_inference_time_per_episode!r}")
    return human + [EVAL_HEADER, row]


def cmd_eval(args: argparse.Namespace) -> int:
    rc = _resolve(args)
    state, _ = ckpt.load_checkpoint(args.checkpoint)
    if args.traj_dir:
        Path(args.traj_dir).mkdir(parents=True, exist_ok=True)
    report = evaluate(state.policy, rc.scenario, args.episodes_n, rc.seed,
                      cfg=rc.sac, vehicle=rc.vehicle, lidar=rc.lidar, env_cfg=rc.env,
                      trajectory_dir=args.traj_dir,
                      dynamic_obstacles=rc.dynamic_obstacles)
    print(f"evaluation: {args.episodes_n} episodes, scenario {rc.scenario}, seed {rc.seed}")
    for line in _report_lines(report):
        print(line)
    if args.min_success is not None and report.success_rate < args.min_success:
        print(f"success rate below threshold {args.min_success}", file=sys.stderr)
        return EXIT_NOPATH
    return EXIT_OK


def _median_iqr(values: list[float]) -> tuple[float, float, float]:
    med = statistics.median(values)
    if len(values) < 2:
        return med, med, med
    qs = statistics.quantiles(values, n=4, method="inclusive")
    return med, qs[0], qs[2]


def cmd_bench(args: argparse.Namespace) -> int:
    rc = _resolve(args)
    state, _ = ckpt.load_checkpoint(args.checkpoint)
    kinds = args.cases.split(",")
    results: dict[str, dict[str, str]] = {"hybrid_astar": {}, "sac_policy": {}}
    for kind in kinds:
        spec = make_scenario(kind.strip(), rc.seed, rc.vehicle)
        start_state = sample_start(spec, np.random.default_rng(rc.seed), rc.vehicle)
        astar_times: list[float] = []
        failed = 0
        for _ in range(args.runs):
            try:
                result = plan(start_state.pose, spec.goal, spec, rc.search, rc.vehicle)
                astar_times.append(result.planning_time)
            except NoPathError:
                failed += 1
        if astar_times:
            med, q1, q3 = _median_iqr(astar_times)
            cell = f"{med:.3f}s [{q1:.3f},{q3:.3f}]"
            if failed:
                cell += f" ({failed}/{args.runs} NoPath)"
        else:
            cell = f"NoPath ({failed}/{args.runs})"
        results["hybrid_astar"][kind] = cell
        env = build_env(kind.strip(), rc.sac, noise_sigma=0.0, vehicle=rc.vehicle,
                        lidar=rc.lidar, env_cfg=rc.env, scenario_seed=rc.seed)
        sac_times = []
        for _ in range(args.runs):
            t0 = time.perf_counter()
            rollout_deterministic(state.policy, env, EVAL_EPISODE_SEED_BASE)
            sac_times.append(time.perf_counter() - t0)
        med, q1, q3 = _median_iqr(sac_times)
        results["sac_policy"][kind] = f"{med:.3f}s [{q1:.3f},{q3:.3f}]"
    width = max(len(c) for row in results.values() for c in row.values()) + 2
    header = "method".ljust(14) + "".join(k.strip().ljust(width) for k in kinds)
    print(header)
    for method, cells in results.items():
        print(method.ljust(14) + "".join(cells[k].ljust(width) for k in kinds))
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    rc = _resolve(args)
    rows = load_trajectory_csv(args.csv)
    spec = make_scenario(rc.scenario, rc.seed, rc.vehicle)
    render_svg(rows, spec, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    rc = _resolve(args)
    spec = make_scenario(rc.scenario, rc.seed, rc.vehicle)
    if args.start:
        try:
            x, y, theta = (float(p) for p in args.start.split(","))
        except ValueError as exc:
            raise ConfigError(f"--start expects x,y,theta: {exc}") from exc
        from .vehicle import Pose

        start_pose = Pose(x, y, theta)
    else:
        start_pose = sample_start(spec, np.random.default_rng(rc.seed), rc.vehicle).pose
    result = plan(start_pose, spec.goal, spec, rc.search, rc.vehicle)
    print(f"plan: {len(result.path)} poses, cost {result.cost:.2f}, "
          f"{result.expansions} expansions, {result.planning_time:.3f}s")
    if args.out:
        from .hybrid_astar import interpolate_path
        from .trajectory import TrajectoryRow

        pts = interpolate_path(result, rc.search, rc.vehicle)
        rows = [TrajectoryRow(i, x, y, th, d * 1.0, 0.0, float(d))
                for i, (x, y, th, d) in enumerate(pts)]
        save_trajectory_csv(rows, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parksac",
                                     description="Autonomous-parking trajectory stack")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="INI config file")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override one config value (repeatable)")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--scenario", choices=("parallel", "perpendicular", "mixed"),
                       help="override run.scenario")

    p_train = sub.add_parser("train", help="train a parking policy")
    common(p_train)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--episodes", type=int, help="override sac.episodes")
    p_train.add_argument("--resume", help="checkpoint to resume from")
    p_train.add_argument("--verbose", action="store_true")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    common(p_eval)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("-n", "--episodes-n", type=int, default=100,
                        help="evaluation episodes")
    p_eval.add_argument("--traj-dir", help="write per-episode trajectory CSVs here")
    p_eval.add_argument("--min-success", type=float,
                        help="exit 3 if success rate falls below this")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="compare planning time against hybrid A*")
    common(p_bench)
    p_bench.add_argument("--checkpoint", required=True)
    p_bench.add_argument("--runs", type=int, default=20)
    p_bench.add_argument("--cases", default="parallel,perpendicular,mixed")
    p_bench.set_defaults(func=cmd_bench)

    p_render = sub.add_parser("render", help="render a trajectory CSV to SVG")
    common(p_render)
    p_render.add_argument("--csv", required=True)
    p_render.add_argument("--out", required=True)
    p_render.set_defaults(func=cmd_render)

    p_plan = sub.add_parser("plan", help="run a single hybrid A* query")
    common(p_plan)
    p_plan.add_argument("--start", help="x,y,theta start pose (default: sampled)")
    p_plan.add_argument("--out", help="write the interpolated path as trajectory CSV")
    p_plan.set_defaults(func=cmd_plan)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except NoPathError as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_NOPATH
    except (ckpt.CheckpointError, TrajectoryFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
