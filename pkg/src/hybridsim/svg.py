"""Minimal deterministic SVG output: heatmaps and time-series strips."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np


def _num(x):
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _color(v, lo, hi):
    """White to dark blue ramp."""
    u = 0.0 if hi <= lo else (v - lo) / (hi - lo)
    u = min(max(u, 0.0), 1.0)
    r = int(round(255 - 215 * u))
    g = int(round(255 - 175 * u))
    b = int(round(255 - 75 * u))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(grid, row_labels, col_labels, title="", row_title="", col_title="", cell=36):
    """Grid as coloured cells; NaN cells stay blank. Rows are drawn bottom-up."""
    grid = np.asarray(grid, float)
    nr, nc = grid.shape
    left, top = 70, 40
    w = left + nc * cell + 20
    h = top + nr * cell + 50
    finite = grid[np.isfinite(grid)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" '
           f'font-size="10">',
           f'<text x="{left}" y="20" font-size="13">{escape(title)}</text>']
    for i in range(nr):
        y = top + (nr - 1 - i) * cell
        out.append(f'<text x="{left - 6}" y="{_num(y + cell / 2 + 3)}" text-anchor="end">'
                   f'{escape(str(row_labels[i]))}</text>')
        for j in range(nc):
            v = grid[i, j]
            x = left + j * cell
            fill = _color(v, lo, hi) if np.isfinite(v) else "none"
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="#999"/>')
            if np.isfinite(v) and v != 0:
                out.append(f'<text x="{_num(x + cell / 2)}" y="{_num(y + cell / 2 + 3)}" text-anchor="middle" '
                           f'font-size="8">{v:.3g}</text>')
    for j in range(nc):
        out.append(f'<text x="{_num(left + j * cell + cell / 2)}" y="{top + nr * cell + 14}" '
                   f'text-anchor="middle">{escape(str(col_labels[j]))}</text>')
    out.append(f'<text x="{_num(left + nc * cell / 2)}" y="{top + nr * cell + 34}" '
               f'text-anchor="middle">{escape(col_title)}</text>')
    out.append(f'<text x="12" y="{_num(top + nr * cell / 2)}" transform="rotate(-90 12 '
               f'{_num(top + nr * cell / 2)})" text-anchor="middle">{escape(row_title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def strips(t, series: dict, title="", width=720, strip_height=90, max_points=2000):
    """One polyline strip per channel, stacked vertically."""
    t = np.asarray(t, float)
    step = max(1, len(t) // max_points)
    tt = t[::step]
    left, top = 90, 30
    h = top + len(series) * (strip_height + 10) + 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width + left + 20}" height="{h}" '
           f'font-family="sans-serif" font-size="10">',
           f'<text x="{left}" y="18" font-size="13">{escape(title)}</text>']
    t0, t1 = (float(tt[0]), float(tt[-1])) if len(tt) > 1 else (0.0, 1.0)
    span_t = t1 - t0 if t1 > t0 else 1.0
    for k, (name, y) in enumerate(series.items()):
        y = np.asarray(y, float)[::step]
        y0 = top + k * (strip_height + 10)
        lo, hi = float(np.min(y)), float(np.max(y))
        if hi - lo < 1e-12:
            lo, hi = lo - 1.0, hi + 1.0
        pts = " ".join(f"{_num(left + (ti - t0) / span_t * width)},{_num(y0 + strip_height * (hi - v) / (hi - lo))}"
                       for ti, v in zip(tt, y))
        out.append(f'<rect x="{left}" y="{y0}" width="{width}" height="{strip_height}" fill="none" stroke="#ccc"/>')
        out.append(f'<text x="{left - 6}" y="{y0 + strip_height / 2:.0f}" text-anchor="end">{escape(name)}</text>')
        out.append(f'<text x="{left - 6}" y="{y0 + 10}" text-anchor="end" font-size="8">{hi:.3g}</text>')
        out.append(f'<text x="{left - 6}" y="{y0 + strip_height}" text-anchor="end" font-size="8">{lo:.3g}</text>')
        out.append(f'<polyline fill="none" stroke="#1f4e99" stroke-width="0.8" points="{pts}"/>')
    out.append(f'<text x="{left + width / 2:.0f}" y="{h - 8}" text-anchor="middle">time (s)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
