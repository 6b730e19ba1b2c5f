from xml.etree import ElementTree as ET

import pytest

from parksac.render import MARGIN, SCALE, render_svg
from parksac.scenarios import make_scenario
from parksac.trajectory import (
    TrajectoryFormatError,
    TrajectoryRow,
    load_trajectory_csv,
    save_trajectory_csv,
)


def rows_fixture():
    return [
        TrajectoryRow(0, 0.0, 0.0, 0.0, 0.0),
        TrajectoryRow(1, 0.1, 0.0, 0.0, 1.0, 0.05, 1.0, -2.5, False, False),
        TrajectoryRow(2, 0.2, 0.05, 0.1, 1.0, -0.05, 0.5, -2.4, False, True),
    ]


def test_trajectory_roundtrip(tmp_path):
    p = tmp_path / "traj.csv"
    rows = rows_fixture()
    save_trajectory_csv(rows, p)
    assert load_trajectory_csv(p) == rows


def test_bad_header_names_line_one(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(TrajectoryFormatError, match="line 1"):
        load_trajectory_csv(p)


def test_malformed_row_names_its_line(tmp_path):
    p = tmp_path / "bad.csv"
    save_trajectory_csv(rows_fixture(), p)
    text = p.read_text().splitlines()
    text[2] = text[2].replace(text[2].split(",")[1], "not-a-number", 1)
    p.write_text("\n".join(text) + "\n")
    with pytest.raises(TrajectoryFormatError, match="line 3"):
        load_trajectory_csv(p)


def test_wrong_field_count_names_its_line(tmp_path):
    p = tmp_path / "bad.csv"
    save_trajectory_csv(rows_fixture(), p)
    p.write_text(p.read_text() + "1,2,3\n")
    with pytest.raises(TrajectoryFormatError, match="line 5"):
        load_trajectory_csv(p)


# ------------------------------------------------------------------ svg


def test_empty_trajectory_renders_scene_only(tmp_path):
    spec = make_scenario("perpendicular", 0)
    out = tmp_path / "scene.svg"
    render_svg([], spec, out)
    root = ET.parse(out).getroot()
    tags = [el.tag.split("}")[-1] for el in root.iter()]
    assert "polyline" not in tags
    assert tags.count("polygon") == 1 + len(spec.obstacles) + 1  # lot + obstacles + target


def test_two_point_trajectory_mapped_coordinates(tmp_path):
    spec = make_scenario("perpendicular", 0)
    rows = [TrajectoryRow(0, -2.0, 1.0, 0.0, 0.0), TrajectoryRow(1, 3.0, 1.0, 0.0, 1.0)]
    out = tmp_path / "line.svg"
    render_svg(rows, spec, out)
    root = ET.parse(out).getroot()
    polylines = [el for el in root.iter() if el.tag.split("}")[-1] == "polyline"]
    assert len(polylines) == 1
    pts = [tuple(map(float, p.split(","))) for p in polylines[0].get("points").split()]
    assert len(pts) == 2
    # hand-computed viewBox mapping: lot spans [-10, 10] in both axes
    half = spec.lot.bounding_radius()
    expect_x = (-2.0 - (spec.lot.center[0] - half)) * SCALE + MARGIN
    expect_y = ((spec.lot.center[1] + half) - 1.0) * SCALE + MARGIN
    assert pts[0][0] == pytest.approx(expect_x, abs=0.01)
    assert pts[0][1] == pytest.approx(expect_y, abs=0.01)


def test_svg_is_well_formed_xml(tmp_path):
    spec = make_scenario("mixed", 1)
    rows = [TrajectoryRow(i, 0.1 * i, 0.05 * i, 0.01 * i, 1.0) for i in range(40)]
    out = tmp_path / "traj.svg"
    render_svg(rows, spec, out)
    root = ET.parse(out).getroot()  # parse failure would raise
    assert root.tag.endswith("svg")
    tags = [el.tag.split("}")[-1] for el in root.iter()]
    # heading ticks every 10 steps -> 4 tick lines for 40 rows
    assert tags.count("line") == 4
    assert tags.count("circle") == 1  # start marker
