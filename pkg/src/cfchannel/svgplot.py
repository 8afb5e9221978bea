"""Minimal SVG line charts written as plain markup."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    x = first
    while x <= hi + 1e-9 * step:
        ticks.append(round(x, 10))
        x += step
    return ticks


def line_chart(xs: Sequence[float], series, *, vline: float | None = None,
               vline_label: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 720, height: int = 440) -> str:
    """Render ``series = [(label, color, ys), ...]``; ``None`` values break a line."""
    left, right, top, bottom = 70, 190, 20, 50
    pw, ph = width - left - right, height - top - bottom
    finite = [y for _, _, ys in series for y in ys if y is not None and math.isfinite(y)]
    y_lo = min(finite, default=-1.0)
    y_hi = max(finite, default=0.0)
    if y_hi - y_lo < 1e-12:
        y_lo -= 1.0
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for tx in _nice_ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(tx):.2f}" y1="{top + ph}" x2="{sx(tx):.2f}" '
                   f'y2="{top + ph + 4}" stroke="#333"/>')
        out.append(f'<text x="{sx(tx):.2f}" y="{top + ph + 16}" text-anchor="middle">{tx:g}</text>')
    for ty in _nice_ticks(y_lo, y_hi):
        out.append(f'<line x1="{left - 4}" y1="{sy(ty):.2f}" x2="{left}" y2="{sy(ty):.2f}" '
                   f'stroke="#333"/>')
        out.append(f'<text x="{left - 6}" y="{sy(ty) + 4:.2f}" text-anchor="end">{ty:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>')

    for k, (label, color, ys) in enumerate(series):
        segments, cur = [], []
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y):
                if cur:
                    segments.append(cur)
                cur = []
            else:
                cur.append(f"{sx(x):.2f},{sy(y):.2f}")
        if cur:
            segments.append(cur)
        for seg in segments:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
                       f'points="{" ".join(seg)}"/>')
        ly = top + 14 + 18 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{escape(label)}</text>')

    if vline is not None and x_lo <= vline <= x_hi:
        out.append(f'<line x1="{sx(vline):.2f}" y1="{top}" x2="{sx(vline):.2f}" '
                   f'y2="{top + ph}" stroke="#555" stroke-dasharray="5,4"/>')
        ly = top + 14 + 18 * len(series)
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="#555" stroke-dasharray="5,4"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{escape(vline_label)} '
                   f'(n0 = {vline:.1f})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
