"""Minimal SVG line plots (polyline + axes), no plotting dependency."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

COLORS = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e"]


def _finite(xs, ys):
    return [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]


def line_plot(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 640,
    height: int = 400,
    markers: Sequence[bool] | None = None,
) -> str:
    """Render ``(label, x, y)`` series on shared axes; non-finite points are dropped."""
    pts = [p for _, xs, ys in series for p in _finite(xs, ys)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y0 + 0.5
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{mt + ph / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {mt + ph / 2})">{escape(ylabel)}</text>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{mt + ph + 16}" text-anchor="middle" font-size="10">{fx:.3g}</text>')
        out.append(f'<text x="{ml - 5}" y="{sy(fy) + 3:.1f}" text-anchor="end" font-size="10">{fy:.3g}</text>')
    markers = markers or [False] * len(series)
    for k, ((label, xs, ys), marker) in enumerate(zip(series, markers)):
        color = COLORS[k % len(COLORS)]
        fin = _finite(xs, ys)
        if marker:
            for x, y in fin:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2" fill="none" stroke="{color}"/>')
        elif fin:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in fin)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        out.append(
            f'<text x="{ml + pw - 5}" y="{mt + 15 + 14 * k}" text-anchor="end" font-size="11" '
            f'fill="{color}">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out)
