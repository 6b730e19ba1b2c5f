"""Trajectory log I/O.

CSV schema shared by environment rollouts and planner output:
t,x,y,theta,v,steer,throttle,reward,collision,success
Row t=0 carries the initial state with zeroed action/reward/flags.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .fileio import atomic_write_text

HEADER = ["t", "x", "y", "theta", "v", "steer", "throttle", "reward", "collision", "success"]


@dataclass(frozen=True)
class TrajectoryRow:
    t: int
    x: float
    y: float
    theta: float
    v: float
    steer: float = 0.0
    throttle: float = 0.0
    reward: float = 0.0
    collision: bool = False
    success: bool = False


class TrajectoryFormatError(ValueError):
    """Malformed trajectory CSV; message names the offending line."""


def save_trajectory_csv(rows: list[TrajectoryRow], path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in rows:
        writer.writerow([int(r.t), repr(float(r.x)), repr(float(r.y)),
                         repr(float(r.theta)), repr(float(r.v)), repr(float(r.steer)),
                         repr(float(r.throttle)), repr(float(r.reward)),
                         int(r.collision), int(r.success)])
    atomic_write_text(path, buf.getvalue())


def load_trajectory_csv(path: str | Path) -> list[TrajectoryRow]:
    rows: list[TrajectoryRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise TrajectoryFormatError(f"{path}: line 1: expected header {','.join(HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(HEADER):
                raise TrajectoryFormatError(
                    f"{path}: line {lineno}: expected {len(HEADER)} fields, got {len(rec)}"
                )
            try:
                rows.append(TrajectoryRow(
                    t=int(rec[0]), x=float(rec[1]), y=float(rec[2]), theta=float(rec[3]),
                    v=float(rec[4]), steer=float(rec[5]), throttle=float(rec[6]),
                    reward=float(rec[7]), collision=bool(int(rec[8])),
                    success=bool(int(rec[9])),
                ))
            except ValueError as exc:
                raise TrajectoryFormatError(f"{path}: line {lineno}: {exc}") from exc
    return rows
