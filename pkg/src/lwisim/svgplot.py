"""Minimal deterministic SVG line plots.

No plotting dependency: the acceptance contract requires byte-identical
output for identical input, which is easiest to guarantee by writing the
XML directly with fixed float formatting.
"""

from __future__ import annotations

import math
from typing import Sequence

__all__ = ["emit_svg"]

WIDTH, HEIGHT = 720.0, 480.0
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 84.0, 24.0, 48.0, 64.0

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _label(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e5 or abs(x) < 1e-3:
        return f"{x:.3g}"
    return f"{x:g}"


def emit_svg(
    x: Sequence[float],
    series: Sequence[tuple[str, Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> str:
    """Standalone SVG with one polyline per series, shared x axis."""
    if not x or not series:
        raise ValueError("emit_svg needs a nonempty sweep")
    xmin, xmax = min(x), max(x)
    ys = [v for _, vals in series for v in vals]
    ymin, ymax = min(ys), max(ys)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin -= pad
    ymax += pad

    px0, px1 = MARGIN_L, WIDTH - MARGIN_R
    py0, py1 = HEIGHT - MARGIN_B, MARGIN_T

    def sx(v: float) -> float:
        return px0 + (v - xmin) / (xmax - xmin) * (px1 - px0)

    def sy(v: float) -> float:
        return py0 + (v - ymin) / (ymax - ymin) * (py1 - py0)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
        f'<rect x="0" y="0" width="{WIDTH:g}" height="{HEIGHT:g}" fill="white"/>',
        f'<text x="{WIDTH / 2:g}" y="28" font-family="sans-serif" font-size="16" '
        f'text-anchor="middle">{title}</text>',
        f'<rect x="{_fmt(px0)}" y="{_fmt(py1)}" width="{_fmt(px1 - px0)}" '
        f'height="{_fmt(py0 - py1)}" fill="none" stroke="black" stroke-width="1"/>',
    ]

    for t in _ticks(xmin, xmax):
        out.append(f'<line x1="{_fmt(sx(t))}" y1="{_fmt(py0)}" x2="{_fmt(sx(t))}" '
                   f'y2="{_fmt(py0 + 5)}" stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(sx(t))}" y="{_fmt(py0 + 20)}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{_label(t)}</text>')
    for t in _ticks(ymin, ymax):
        out.append(f'<line x1="{_fmt(px0 - 5)}" y1="{_fmt(sy(t))}" x2="{_fmt(px0)}" '
                   f'y2="{_fmt(sy(t))}" stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(px0 - 9)}" y="{_fmt(sy(t) + 4)}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{_label(t)}</text>')

    out.append(f'<text x="{(px0 + px1) / 2:g}" y="{HEIGHT - 16:g}" font-family="sans-serif" '
               f'font-size="13" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="20" y="{(py0 + py1) / 2:g}" font-family="sans-serif" '
               f'font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 20 {(py0 + py1) / 2:g})">{ylabel}</text>')

    for i, (name, vals) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, vals))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        out.append(f'<text x="{_fmt(px1 - 8)}" y="{_fmt(py1 + 16 + 16 * i)}" '
                   f'font-family="sans-serif" font-size="12" text-anchor="end" '
                   f'fill="{color}">{name}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
