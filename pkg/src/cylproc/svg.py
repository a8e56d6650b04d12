"""Minimal SVG rendering of tail curves on a logarithmic probability axis."""
from __future__ import annotations

import math

WIDTH, HEIGHT, MARGIN = 640, 420, 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"]


def _fmt(x):
    return f"{x:.2f}"


def render(series, title="", floor=-12.0):
    """Render ``series`` to an SVG string.

    Parameters
    ----------
    series : list of dict
        Each with ``label``, ``x``, ``log_y`` (natural log, NaN skipped) and
        ``style`` (``"line"`` or ``"points"``).
    floor : float
        Lowest ``log10`` probability shown.
    """
    xs = [x for s in series for x, y in zip(s["x"], s["log_y"]) if math.isfinite(y)]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    y_lo, y_hi = floor, 0.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * pw

    def py(log_y):
        v = max(log_y / math.log(10.0), y_lo)
        return MARGIN + (y_hi - v) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" '
           'fill="none" stroke="black"/>',
           f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" '
           f'font-size="14">{title}</text>']
    for dec in range(int(y_lo), 1, 2):
        y = MARGIN + (y_hi - dec) / (y_hi - y_lo) * ph
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-size="10">1e{dec}</text>')
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        out.append(f'<text x="{_fmt(px(xv))}" y="{HEIGHT - MARGIN + 16}" '
                   f'text-anchor="middle" font-size="10">{xv:.3g}</text>')
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s["x"], s["log_y"]) if math.isfinite(y)]
        if s.get("style") == "points":
            out.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="{color}"/>'
                       for a, b in pts)
        elif pts:
            path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
            dash = ' stroke-dasharray="5,3"' if s.get("dashed") else ""
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"{dash}/>')
        ly = MARGIN + 14 + 14 * i
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{ly}" text-anchor="end" '
                   f'font-size="11" fill="{color}">{s["label"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
