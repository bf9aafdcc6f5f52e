"""File emission: CSV writers, an SVG heatmap renderer and a flat config parser.

CSV is the canonical format and stores floats with 17 significant digits so
values round-trip exactly. The SVG renderer reads only CSV text, so plots can
be regenerated without rerunning a sweep.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from .model import CrossingPoint, Status, Trajectory
from .sweep import RegionMap, Source

REGION_COLUMNS = (
    "k", "gamma", "tau", "verdict_theorem", "verdict_roots", "verdict_sim", "agreement", "clause",
)
_SOURCE_COLUMN = {
    Source.THEOREM: "verdict_theorem",
    Source.ROOTS: "verdict_roots",
    Source.SIMULATION: "verdict_sim",
}
MISSING = "NA"

VERDICT_COLORS = {
    Status.STABLE.value: "#4c9a5b",
    Status.UNSTABLE.value: "#c8453c",
    Status.BIFURCATION.value: "#e0b43a",
    Status.UNKNOWN.value: "#b0b0b0",
    MISSING: "#ffffff",
}


class ConfigError(ValueError):
    """Malformed configuration file or option value."""


def fmt_full(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_short(x: float) -> str:
    return f"{float(x):.6g}"


def _write_rows(path: str | Path | None, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def trajectory_csv(traj: Trajectory, path: str | Path | None = None) -> str:
    """Columns ``t,x``; returns the CSV text and writes it when ``path`` is given."""
    rows = ((fmt_full(t), fmt_full(x)) for t, x in zip(traj.times, traj.values))
    return _write_rows(path, ("t", "x"), rows)


def roots_csv(
    real_root: float | None, crossings: Sequence[CrossingPoint], path: str | Path | None = None
) -> str:
    """Columns ``kind,value,residual_real,residual_imag``.

    ``kind`` is ``real`` for a positive real root (value = lambda) or
    ``imaginary`` for a crossing F(i v) = 0 (value = v).
    """
    rows = []
    if real_root is not None:
        rows.append(("real", fmt_full(real_root), fmt_full(0.0), fmt_full(0.0)))
    for c in crossings:
        rows.append(("imaginary", fmt_full(c.v), fmt_full(c.residual_real), fmt_full(c.residual_imag)))
    return _write_rows(path, ("kind", "value", "residual_real", "residual_imag"), rows)


def region_csv(region: RegionMap, path: str | Path | None = None) -> str:
    """One row per cell in sweep order; sources that were not requested read ``NA``."""
    rows = []
    for cell in region.cells:
        verdicts = {
            col: (cell.verdicts[src].status.value if src in cell.verdicts else MISSING)
            for src, col in _SOURCE_COLUMN.items()
        }
        rows.append((
            fmt_full(cell.k),
            fmt_full(cell.gamma),
            fmt_full(cell.tau),
            verdicts["verdict_theorem"],
            verdicts["verdict_roots"],
            verdicts["verdict_sim"],
            "true" if cell.agreement else "false",
            cell.clause,
        ))
    return _write_rows(path, REGION_COLUMNS, rows)


def read_region_csv(source: str | Path) -> list[dict]:
    """Parse region CSV text or a path to one; numeric columns become floats."""
    text = _read_text(source)
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != REGION_COLUMNS:
        raise ValueError(f"unexpected region CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        for key in ("k", "gamma", "tau"):
            row[key] = float(row[key])
        row["agreement"] = row["agreement"] == "true"
        out.append(row)
    return out


def _read_text(source: str | Path) -> str:
    if isinstance(source, Path) or ("\n" not in str(source) and Path(str(source)).is_file()):
        return Path(source).read_text()
    return str(source)


def _spacing(values: Sequence[float]) -> float:
    diffs = [b - a for a, b in zip(values, values[1:]) if b > a]
    return min(diffs) if diffs else 1.0


def svg_from_csv(source: str | Path, column: str = "verdict_theorem", cell_px: int = 16) -> str:
    """Heatmap of one verdict column: one rect per cell plus an embedded legend."""
    if column not in REGION_COLUMNS[3:6]:
        raise ValueError(f"column must be one of {REGION_COLUMNS[3:6]}")
    rows = read_region_csv(source)
    if not rows:
        raise ValueError("region CSV has no cells")
    ks = sorted({r["k"] for r in rows})
    gs = sorted({r["gamma"] for r in rows})
    dk, dg = _spacing(ks), _spacing(gs)
    margin, legend_w = 48, 140
    width = margin + cell_px * len(ks) + legend_w
    height = 2 * margin + cell_px * len(gs)

    def x_of(k):
        return margin + cell_px * round((k - ks[0]) / dk)

    def y_of(g):
        # gamma increases upwards
        return margin + cell_px * (len(gs) - 1 - round((g - gs[0]) / dg))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{column}</title>',
    ]
    for r in rows:
        color = VERDICT_COLORS.get(r[column], VERDICT_COLORS[Status.UNKNOWN.value])
        parts.append(
            f'<rect x="{x_of(r["k"])}" y="{y_of(r["gamma"])}" width="{cell_px}" height="{cell_px}" '
            f'fill="{color}" data-k="{fmt_short(r["k"])}" data-gamma="{fmt_short(r["gamma"])}" '
            f'data-verdict="{r[column]}"/>'
        )
    grid_right = margin + cell_px * len(ks)
    grid_bottom = margin + cell_px * len(gs)
    parts.append(
        f'<text x="{margin}" y="{grid_bottom + 20}" font-size="11">k: {fmt_short(ks[0])} .. {fmt_short(ks[-1])}</text>'
    )
    parts.append(
        f'<text x="4" y="{margin - 8}" font-size="11">gamma: {fmt_short(gs[0])} .. {fmt_short(gs[-1])}</text>'
    )
    parts.append('<g class="legend">')
    for i, (label, color) in enumerate(VERDICT_COLORS.items()):
        y = margin + 18 * i
        parts.append(
            f'<rect x="{grid_right + 12}" y="{y}" width="12" height="12" fill="{color}" stroke="#333"/>'
        )
        parts.append(f'<text x="{grid_right + 30}" y="{y + 10}" font-size="11">{label}</text>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


__all__ = [
    "ConfigError",
    "REGION_COLUMNS",
    "fmt_full",
    "fmt_short",
    "parse_config",
    "read_config",
    "read_region_csv",
    "region_csv",
    "roots_csv",
    "svg_from_csv",
    "trajectory_csv",
]
