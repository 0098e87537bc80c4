"""Minimal SVG line plots (polyline + axes). CSV remains the canonical output."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 60


def _nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step) * step, hi + step * 1e-9, step)


def line_plot_svg(x, y, xlabel: str, ylabel: str, title: str = "",
                  hline: float | None = None, hline_label: str = "") -> str:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xlo, xhi = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    ylo = min(0.0, float(y.min()) if y.size else 0.0)
    yhi = max(float(y.max()) if y.size else 1.0, hline or 0.0) * 1.05 or 1.0
    if xhi <= xlo:
        xhi = xlo + 1.0

    def px(v):
        return MARGIN + (v - xlo) / (xhi - xlo) * (WIDTH - 2 * MARGIN)

    def py(v):
        return HEIGHT - MARGIN - (v - ylo) / (yhi - ylo) * (HEIGHT - 2 * MARGIN)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    x0, y0 = MARGIN, HEIGHT - MARGIN
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{WIDTH - MARGIN}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN}" stroke="black"/>')
    for t in _nice_ticks(xlo, xhi):
        out.append(f'<line x1="{px(t):.2f}" y1="{y0}" x2="{px(t):.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{y0 + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(ylo, yhi):
        out.append(f'<line x1="{x0 - 5}" y1="{py(t):.2f}" x2="{x0}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    if hline is not None:
        out.append(f'<line x1="{x0}" y1="{py(hline):.2f}" x2="{WIDTH - MARGIN}" y2="{py(hline):.2f}" '
                   'stroke="red" stroke-dasharray="4,3"/>')
        if hline_label:
            out.append(f'<text x="{WIDTH - MARGIN}" y="{py(hline) - 4:.2f}" text-anchor="end" '
                       f'fill="red">{escape(hline_label)}</text>')
    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
    out.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="25" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
