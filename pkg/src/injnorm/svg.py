"""Minimal SVG line plots: polylines, axes and a legend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

__all__ = ["Series", "line_plot"]

_COLORS = ("#c0392b", "#2e86c1", "#7d3c98", "#229954", "#d68910", "#566573")


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    yerr: Sequence[float] | None = None
    dashed: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_plot(series: Sequence[Series], title: str = "", xlabel: str = "", ylabel: str = "", width: int = 640, height: int = 420) -> str:
    """Render the series as a standalone SVG document."""
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for i, v in enumerate(s.y) for v in ((v - (s.yerr[i] if s.yerr else 0)), (v + (s.yerr[i] if s.yerr else 0)))]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad

    def X(v):
        return left + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{_fmt(X(t))}" y1="{top + ph}" x2="{_fmt(X(t))}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X(t))}" y="{top + ph + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{_fmt(Y(t))}" x2="{left}" y2="{_fmt(Y(t))}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_fmt(Y(t) + 4)}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in zip(s.x, s.y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        if s.yerr:
            for a, b, e in zip(s.x, s.y, s.yerr):
                out.append(
                    f'<line x1="{_fmt(X(a))}" y1="{_fmt(Y(b - e))}" x2="{_fmt(X(a))}" y2="{_fmt(Y(b + e))}" stroke="{color}"/>'
                )
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
