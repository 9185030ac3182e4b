"""Deterministic SVG artifacts: family maps, sweep and time-series charts.

Rendering is string assembly with fixed number formatting, so two runs over
identical data emit byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (
    CELL_MM,
    GRID_COLS,
    GRID_ROWS,
    CellId,
    Network,
    cell_rectangle,
)
from .stimulus import Family

FAMILY_COLORS = {
    Family.RED: "#d7301f",
    Family.GRADIENT: "#fdae61",
    Family.GREEN: "#1a9850",
    Family.BLUE: "#4575b4",
}

_MARGIN = 40.0
_SCALE = 3.0  # px per mm


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _skin_to_px(x_mm: float, y_mm: float) -> tuple[float, float]:
    """Map skin coordinates (y up) to SVG pixels (y down)."""
    return (_MARGIN + x_mm * _SCALE, _MARGIN + (GRID_ROWS * CELL_MM - y_mm) * _SCALE)


def _grid_svg(network: Network, cell_fills: dict[CellId, str], title: str) -> str:
    width = 2 * _MARGIN + GRID_COLS * CELL_MM * _SCALE
    height = 2 * _MARGIN + GRID_ROWS * CELL_MM * _SCALE
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
        f'<text x="{_fmt(width / 2)}" y="24" font-family="sans-serif" font-size="16" '
        f'text-anchor="middle">{title}</text>',
    ]
    for cell in sorted(cell_fills):
        rect = cell_rectangle(cell)
        x, y = _skin_to_px(rect.x0, rect.y1)
        side = CELL_MM * _SCALE
        parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(side)}" height="{_fmt(side)}" '
            f'fill="{cell_fills[cell]}" stroke="#999" stroke-width="0.5"/>'
        )
    tri = network.triangulation
    for a, b in tri.edges:
        xa, ya = _skin_to_px(tri.nodes[a].x, tri.nodes[a].y)
        xb, yb = _skin_to_px(tri.nodes[b].x, tri.nodes[b].y)
        parts.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" y2="{_fmt(yb)}" '
            f'stroke="#222" stroke-width="2"/>'
        )
    for name in sorted(network.electrodes):
        p = network.electrode_point(name)
        x, y = _skin_to_px(p.x, p.y)
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="7" fill="#000"/>')
        parts.append(
            f'<text x="{_fmt(x + 10)}" y="{_fmt(y - 8)}" font-family="sans-serif" '
            f'font-size="14" fill="#000">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def family_map_svg(network: Network, pair, families: dict[CellId, Family]) -> str:
    """Checkerboard of response families with the channel graph on top."""
    fills = {cell: FAMILY_COLORS[fam] for cell, fam in families.items()}
    return _grid_svg(network, fills, f"Response families, pair {pair[0]}-{pair[1]}")


def score_map_svg(network: Network, pair, scores: dict[CellId, float], title: str) -> str:
    """Grid heat map of localization scores (white = 0, dark red = max)."""
    peak = max(scores.values()) if scores else 1.0
    fills = {}
    from .geometry import all_cells
    for cell in all_cells():
        s = scores.get(cell, 0.0) / peak if peak > 0 else 0.0
        shade = int(round(255 * (1.0 - 0.85 * s)))
        fills[cell] = f"rgb(255,{shade},{shade})"
    return _grid_svg(network, fills, title)


def _chart(
    curves: list[tuple[str, str, np.ndarray, np.ndarray]],
    x_label: str,
    y_label: str,
    title: str,
    log_x: bool = False,
) -> str:
    """Polyline chart; each curve is (label, color, x, y)."""
    width, height = 720.0, 420.0
    left, right, top, bottom = 70.0, 20.0, 40.0, 50.0
    xs = np.concatenate([np.log10(c[2]) if log_x else c[2] for c in curves])
    ys = np.concatenate([c[3] for c in curves])
    x_min, x_max = float(xs.min()), float(xs.max())
    y_min, y_max = float(ys.min()), float(ys.max())
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.05 * (y_max - y_min)
    y_min, y_max = y_min - pad, y_max + pad

    def px(x: float, y: float) -> tuple[float, float]:
        u = left + (x - x_min) / (x_max - x_min) * (width - left - right)
        v = top + (y_max - y) / (y_max - y_min) * (height - top - bottom)
        return u, v

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
        f'<text x="{_fmt(width / 2)}" y="24" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{title}</text>',
        f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(width - left - right)}" '
        f'height="{_fmt(height - top - bottom)}" fill="none" stroke="#333"/>',
    ]
    # Axis ticks: 5 linear divisions (decade ticks when logarithmic).
    if log_x:
        tick_xs = [t for t in range(math.ceil(x_min), math.floor(x_max) + 1)]
        tick_labels = [f"1e{t}" for t in tick_xs]
    else:
        tick_xs = [x_min + i * (x_max - x_min) / 5 for i in range(6)]
        tick_labels = [f"{t:.3g}" for t in tick_xs]
    for t, label in zip(tick_xs, tick_labels):
        u, _ = px(t, y_min)
        parts.append(
            f'<line x1="{_fmt(u)}" y1="{_fmt(height - bottom)}" x2="{_fmt(u)}" '
            f'y2="{_fmt(height - bottom + 5)}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{_fmt(u)}" y="{_fmt(height - bottom + 20)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{label}</text>'
        )
    for i in range(6):
        y = y_min + i * (y_max - y_min) / 5
        _, v = px(x_min, y)
        parts.append(
            f'<line x1="{_fmt(left - 5)}" y1="{_fmt(v)}" x2="{_fmt(left)}" y2="{_fmt(v)}" '
            f'stroke="#333"/>'
        )
        parts.append(
            f'<text x="{_fmt(left - 8)}" y="{_fmt(v + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{y:.3g}</text>'
        )
    parts.append(
        f'<text x="{_fmt(width / 2)}" y="{_fmt(height - 10)}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{_fmt(height / 2)}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 {_fmt(height / 2)})">{y_label}</text>'
    )
    for i, (label, color, cx, cy) in enumerate(curves):
        coords = " ".join(
            f"{_fmt(px(math.log10(x) if log_x else x, y)[0])},{_fmt(px(math.log10(x) if log_x else x, y)[1])}"
            for x, y in zip(cx, cy)
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = top + 16 + 16 * i
        parts.append(
            f'<line x1="{_fmt(left + 10)}" y1="{_fmt(ly - 4)}" x2="{_fmt(left + 34)}" '
            f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_fmt(left + 40)}" y="{_fmt(ly)}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sweep_svg(frequencies_hz, resistances, reactances, pair) -> str:
    """Impedance spectrum chart over a log frequency axis."""
    return _chart(
        [
            ("R", "#d7301f", np.asarray(frequencies_hz), np.asarray(resistances)),
            ("X", "#4575b4", np.asarray(frequencies_hz), np.asarray(reactances)),
        ],
        "frequency (Hz)",
        "impedance (Ohm)",
        f"Impedance sweep, pair {pair[0]}-{pair[1]}",
        log_x=True,
    )


def series_svg(times_s, resistances, reactances, pair) -> str:
    """Time trace chart of R and X at the probe frequency."""
    return _chart(
        [
            ("R", "#d7301f", np.asarray(times_s), np.asarray(resistances)),
            ("X", "#4575b4", np.asarray(times_s), np.asarray(reactances)),
        ],
        "time (s)",
        "impedance (Ohm)",
        f"Impedance trace, pair {pair[0]}-{pair[1]}",
    )
