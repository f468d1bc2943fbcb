"""Static SVG regret plots built with :mod:`xml.etree` (no rendering backend)."""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import difficulty
from .policies import IndexParams

WIDTH, HEIGHT = 720, 450
MARGIN = {"left": 70, "right": 170, "top": 30, "bottom": 55}
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


class PlotError(ValueError):
    pass


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    err: Optional[np.ndarray] = None
    dashed: bool = False


def read_summary(path) -> "OrderedDict[str, Series]":
    """Aggregate rows of one summary CSV, keyed by policy."""
    rows: Dict[str, List[Tuple[int, float, float]]] = OrderedDict()
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            if row.get("replication_or_AGG") != "AGG":
                continue
            rows.setdefault(row["policy"], []).append(
                (int(row["checkpoint_t"]), float(row["regret_mean"]), float(row["regret_stderr"]))
            )
    out: "OrderedDict[str, Series]" = OrderedDict()
    for policy, values in rows.items():
        values.sort()
        arr = np.array(values, dtype=np.float64)
        out[policy] = Series(policy, arr[:, 0], arr[:, 1], arr[:, 2])
    return out


def parse_means_spec(text: str) -> List[float]:
    """``"0, -0.3*9"`` -> ``[0, -0.3, ..., -0.3]`` (``value*count`` repeats)."""
    means: List[float] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        value, _, count = part.partition("*")
        means.extend([float(value)] * (int(count) if count else 1))
    if len(means) < 2:
        raise PlotError("envelope means need at least 2 arms")
    return means


def envelope_series(
    means: Sequence[float], horizons: np.ndarray, params: IndexParams, constant: float
) -> List[Series]:
    xs = np.array([n for n in horizons if n >= 2], dtype=np.float64)
    upper = [difficulty.upper_envelope(means, int(n), params, constant).total for n in xs]
    lower = [difficulty.lower_envelope(means, int(n)).total for n in xs]
    return [
        Series(f"upper envelope (C={constant:g})", xs, np.array(upper), dashed=True),
        Series("lower envelope", xs, np.array(lower), dashed=True),
    ]


def _ticks(lo: float, hi: float, log: bool) -> List[float]:
    if log:
        return [10.0**k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)
                if lo <= 10.0**k <= hi]
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / 5))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return list(np.arange(start, hi + step * 0.5, step))


def _label(v: float) -> str:
    return f"{v:.0e}".replace("e+0", "e").replace("e+", "e") if abs(v) >= 1e5 else f"{v:g}"


def render_svg(series: Sequence[Series], xlabel: str = "n", ylabel: str = "pseudo-regret") -> str:
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y if s.err is None else np.concatenate([s.y - s.err, s.y + s.err]) for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    log_x = x_lo > 0 and x_hi / x_lo >= 100
    y_lo, y_hi = min(0.0, float(ys.min())), float(ys.max())
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    if x_hi <= x_lo:
        x_lo, x_hi = (x_lo / 2, x_hi * 2) if log_x or x_lo > 0 else (x_lo - 1, x_hi + 1)
    y_hi *= 1.05
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x: float) -> float:
        if log_x:
            frac = (math.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            frac = (x - x_lo) / (x_hi - x_lo)
        return MARGIN["left"] + frac * plot_w

    def py(y: float) -> float:
        return MARGIN["top"] + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(WIDTH),
        height=str(HEIGHT),
        viewBox=f"0 0 {WIDTH} {HEIGHT}",
        attrib={"font-family": "sans-serif", "font-size": "12"},
    )
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")
    axes = ET.SubElement(svg, "g", id="axes", stroke="black")
    x0, y0 = MARGIN["left"], MARGIN["top"] + plot_h
    ET.SubElement(axes, "line", x1=str(x0), y1=str(y0), x2=str(x0 + plot_w), y2=str(y0))
    ET.SubElement(axes, "line", x1=str(x0), y1=str(MARGIN["top"]), x2=str(x0), y2=str(y0))
    for tx in _ticks(x_lo, x_hi, log_x):
        x = px(tx)
        ET.SubElement(axes, "line", x1=f"{x:.2f}", y1=str(y0), x2=f"{x:.2f}", y2=str(y0 + 5))
        t = ET.SubElement(svg, "text", x=f"{x:.2f}", y=str(y0 + 18), attrib={"text-anchor": "middle"})
        t.text = _label(tx)
    for ty in _ticks(y_lo, y_hi, False):
        y = py(ty)
        ET.SubElement(axes, "line", x1=str(x0 - 5), y1=f"{y:.2f}", x2=str(x0), y2=f"{y:.2f}")
        t = ET.SubElement(svg, "text", x=str(x0 - 8), y=f"{y + 4:.2f}", attrib={"text-anchor": "end"})
        t.text = _label(ty)
    xl = ET.SubElement(svg, "text", x=str(x0 + plot_w / 2), y=str(HEIGHT - 12), attrib={"text-anchor": "middle"})
    xl.text = xlabel + (" (log scale)" if log_x else "")
    yl = ET.SubElement(
        svg, "text", x="16", y=str(MARGIN["top"] + plot_h / 2),
        transform=f"rotate(-90 16 {MARGIN['top'] + plot_h / 2})", attrib={"text-anchor": "middle"},
    )
    yl.text = ylabel

    legend_x = x0 + plot_w + 15
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        group = ET.SubElement(svg, "g", attrib={"class": "series", "data-label": s.label})
        if s.err is not None and np.any(s.err > 0):
            upper = [f"{px(x):.2f},{py(y + e):.2f}" for x, y, e in zip(s.x, s.y, s.err)]
            lower = [f"{px(x):.2f},{py(y - e):.2f}" for x, y, e in zip(s.x[::-1], s.y[::-1], s.err[::-1])]
            ET.SubElement(group, "polygon", points=" ".join(upper + lower), fill=color,
                          attrib={"fill-opacity": "0.2", "stroke": "none"})
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
        style = {"fill": "none", "stroke": color, "stroke-width": "2"}
        if s.dashed:
            style["stroke-dasharray"] = "6,4"
        ET.SubElement(group, "polyline", points=points, attrib=style)
        if len(s.x) == 1:
            ET.SubElement(group, "circle", cx=f"{px(s.x[0]):.2f}", cy=f"{py(s.y[0]):.2f}", r="3", fill=color)
        ly = MARGIN["top"] + 10 + 18 * k
        ET.SubElement(svg, "line", x1=str(legend_x), y1=str(ly), x2=str(legend_x + 20), y2=str(ly),
                      attrib={**style, "class": "legend"})
        label = ET.SubElement(svg, "text", x=str(legend_x + 26), y=str(ly + 4))
        label.text = s.label
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode") + "\n"


def plot(
    summary_paths: Sequence,
    out_path,
    envelope_means: Optional[Sequence[float]] = None,
    params: IndexParams = IndexParams(),
    constant: float = 1.0,
) -> Path:
    """Write an SVG of mean regret (with standard-error bands) plus a CSV of the plotted values.

    All summaries must share one checkpoint grid. Nothing is written on error.
    """
    if not summary_paths:
        raise PlotError("no summary CSVs given")
    series: List[Series] = []
    grids: List[Tuple[str, np.ndarray]] = []
    for path in summary_paths:
        found = read_summary(path)
        if not found:
            raise PlotError(f"{path}: no aggregate rows")
        for s in found.values():
            grids.append((str(path), s.x))
            series.append(s)
    ref_path, ref_grid = grids[0]
    for path, grid in grids[1:]:
        if grid.shape != ref_grid.shape or not np.array_equal(grid, ref_grid):
            raise PlotError(f"checkpoint grids differ between {ref_path} and {path}")
    if envelope_means is not None:
        series.extend(envelope_series(envelope_means, ref_grid, params, constant))
    out_path = Path(out_path)
    svg = render_svg(series)
    table = out_path.with_suffix(".csv")
    with open(table, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["series", "x", "y", "y_low", "y_high"])
        for s in series:
            err = s.err if s.err is not None else np.zeros_like(s.y)
            for x, y, e in zip(s.x, s.y, err):
                writer.writerow([s.label, f"{x:.17g}", f"{y:.17g}", f"{y - e:.17g}", f"{y + e:.17g}"])
    out_path.write_text(svg, encoding="utf-8")
    return out_path
