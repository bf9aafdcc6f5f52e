from __future__ import annotations

import csv
import io
import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdde_stability import Case, Source, SweepSpec, Trajectory, sweep
from fdde_stability.io import (
    REGION_COLUMNS,
    ConfigError,
    fmt_full,
    fmt_short,
    parse_config,
    read_config,
    read_region_csv,
    region_csv,
    roots_csv,
    svg_from_csv,
    trajectory_csv,
)
from fdde_stability.model import CrossingPoint


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_full_format_round_trips(x):
    assert float(fmt_full(x)) == x


def test_short_format_has_six_digits():
    assert fmt_short(0.894132064) == "0.894132"


def test_trajectory_csv_round_trips():
    values = np.array([0.1, 1 / 3, -2e-300, 7.0])
    text = trajectory_csv(Trajectory(0.0, 0.1, values, "x"))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "x"]
    assert [float(r[1]) for r in rows[1:]] == values.tolist()
    assert float(rows[2][0]) == 0.1


def test_roots_csv_layout(tmp_path):
    path = tmp_path / "roots.csv"
    text = roots_csv(2.0, [CrossingPoint(1.5, 1e-12, -3e-13)], path)
    assert path.read_text() == text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["kind", "value", "residual_real", "residual_imag"]
    assert rows[1] == ["real", "2", "0", "0"]
    assert rows[2][0] == "imaginary"
    assert [float(x) for x in rows[2][1:]] == [1.5, 1e-12, -3e-13]
    assert roots_csv(None, []).strip() == "kind,value,residual_real,residual_imag"


@pytest.fixture(scope="module")
def theorem_region():
    return sweep(SweepSpec((-4, 4, 5), (-4, 4, 3), 0.5, 0.5, Case.CASE2, (Source.THEOREM,)))


def test_region_csv_round_trips_with_missing_sources(theorem_region, tmp_path):
    path = tmp_path / "region.csv"
    text = region_csv(theorem_region, path)
    assert text.splitlines()[0] == ",".join(REGION_COLUMNS)
    rows = read_region_csv(path)
    assert rows == read_region_csv(text)
    assert len(rows) == 15
    for row, cell in zip(rows, theorem_region.cells):
        assert (row["k"], row["gamma"], row["tau"]) == (cell.k, cell.gamma, cell.tau)
        assert row["verdict_theorem"] == cell.verdicts[Source.THEOREM].status.value
        assert row["verdict_roots"] == row["verdict_sim"] == "NA"
        assert row["clause"] == cell.clause


def test_read_region_csv_rejects_wrong_header():
    with pytest.raises(ValueError):
        read_region_csv("a,b\n1,2\n")


def test_svg_has_one_rect_per_cell_and_a_legend(theorem_region):
    text = region_csv(theorem_region)
    svg = svg_from_csv(text)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    cells = re.findall(r'<rect [^>]*data-verdict="([A-Za-z]+)"', svg)
    assert len(cells) == 15
    assert cells == [c.verdicts[Source.THEOREM].status.value for c in theorem_region.cells]
    legend = svg[svg.index('<g class="legend">'):]
    for label in ("Stable", "Unstable", "Bifurcation", "Unknown", "NA"):
        assert f">{label}</text>" in legend


def test_svg_puts_larger_gamma_higher(theorem_region):
    svg = svg_from_csv(region_csv(theorem_region))
    ys = {
        float(g): int(y)
        for y, g in re.findall(r'<rect x="\d+" y="(\d+)"[^>]*data-gamma="([-0-9.e]+)"', svg)
    }
    assert ys[4.0] < ys[0.0] < ys[-4.0]


def test_svg_is_a_pure_function_of_csv(theorem_region):
    text = region_csv(theorem_region)
    assert svg_from_csv(text) == svg_from_csv(text)
    with pytest.raises(ValueError):
        svg_from_csv(text, column="clause")


def test_parse_config():
    text = "# sweep\nalpha = 0.5\nk-range = -4, 4, 17  # trailing\n\nalpha=0.7\n"
    assert parse_config(text) == {"alpha": "0.7", "k_range": "-4, 4, 17"}


@pytest.mark.parametrize("text", ["alpha 0.5\n", " = 3\n"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_read_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config(tmp_path / "absent.cfg")
