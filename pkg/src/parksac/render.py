"""Vector rendering of scenarios and trajectories to SVG."""

from __future__ import annotations

import math
from pathlib import Path
from xml.etree import ElementTree as ET

from .geometry import OrientedRect
from .scenarios import ScenarioSpec
from .trajectory import TrajectoryRow
from .fileio import atomic_write_text

SCALE = 30.0   # px per meter
MARGIN = 20.0  # px
TICK_EVERY = 10
TICK_LENGTH = 0.8  # meters


class _Mapper:
    def __init__(self, lot: OrientedRect):
        cx, cy = lot.center
        r = lot.bounding_radius()
        self.min_x, self.max_y = cx - r, cy + r
        self.size = 2 * r * SCALE + 2 * MARGIN

    def to_px(self, x: float, y: float) -> tuple[float, float]:
        return ((x - self.min_x) * SCALE + MARGIN,
                (self.max_y - y) * SCALE + MARGIN)  # SVG y runs downward


def _polygon_points(rect: OrientedRect, m: _Mapper) -> str:
    return " ".join(f"{px:.2f},{py:.2f}" for px, py in
                    (m.to_px(x, y) for x, y in rect.corners()))


def render_svg(rows: list[TrajectoryRow], spec: ScenarioSpec, out_path: str | Path) -> None:
    """Draw the lot, obstacles, target spot, and trajectory into an SVG file.

    The polyline follows the logged (x, y); heading ticks appear every 10
    steps; circle and square markers flag the start and end poses.
    """
    m = _Mapper(spec.lot)
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     viewBox=f"0 0 {m.size:.0f} {m.size:.0f}",
                     width=f"{m.size:.0f}", height=f"{m.size:.0f}")
    ET.SubElement(svg, "rect", x="0", y="0", width=f"{m.size:.0f}",
                  height=f"{m.size:.0f}", fill="white")
    ET.SubElement(svg, "polygon", points=_polygon_points(spec.lot, m),
                  fill="none", stroke="black", attrib={"stroke-width": "2"})
    for ob in spec.obstacles:
        ET.SubElement(svg, "polygon", points=_polygon_points(ob, m),
                      fill="#9aa0a6", stroke="#5f6368")
    ET.SubElement(svg, "polygon", points=_polygon_points(spec.target, m),
                  fill="none", stroke="#1a73e8",
                  attrib={"stroke-width": "2", "stroke-dasharray": "6,4"})
    if rows:
        pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in
                       (m.to_px(r.x, r.y) for r in rows))
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke="#d93025",
                      attrib={"stroke-width": "1.5"})
        for r in rows[::TICK_EVERY]:
            x2 = r.x + TICK_LENGTH * math.cos(r.theta)
            y2 = r.y + TICK_LENGTH * math.sin(r.theta)
            (px1, py1), (px2, py2) = m.to_px(r.x, r.y), m.to_px(x2, y2)
            ET.SubElement(svg, "line", x1=f"{px1:.2f}", y1=f"{py1:.2f}",
                          x2=f"{px2:.2f}", y2=f"{py2:.2f}", stroke="#188038",
                          attrib={"stroke-width": "1"})
        sx, sy = m.to_px(rows[0].x, rows[0].y)
        ET.SubElement(svg, "circle", cx=f"{sx:.2f}", cy=f"{sy:.2f}", r="5",
                      fill="none", stroke="#d93025", attrib={"stroke-width": "2"})
        ex, ey = m.to_px(rows[-1].x, rows[-1].y)
        ET.SubElement(svg, "rect", x=f"{ex - 4:.2f}", y=f"{ey - 4:.2f}", width="8",
                      height="8", fill="#d93025")
    atomic_write_text(out_path, ET.tostring(svg, encoding="unicode"))
