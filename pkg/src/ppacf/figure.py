"""Static SVG autocorrelogram: one stem per lag, dashed line for the bound."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .acf import Autocorrelogram
from .fileio import _open

__all__ = ["render_svg", "emit_figure"]

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 64, 24, 32, 56


def _f(v: float) -> str:
    return f"{v:.2f}"


def _nice_step(span: float) -> float:
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def render_svg(acf: Autocorrelogram, title: str | None = None) -> str:
    rho = np.asarray(acf.rho_hat, dtype=float)
    K = len(rho)
    ub = None if acf.upper_bounds is None else float(acf.upper_bounds[0])
    top = max(float(np.nanmax(rho)) if K else 0.0, ub or 0.0, 1e-3) * 1.1
    step = _nice_step(top)
    top = math.ceil(top / step) * step
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def x(k):
        return LEFT + pw * k / (K + 1)

    def y(v):
        return TOP + ph * (1 - v / top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="20" text-anchor="middle">{escape(title)}</text>')
    x0, y0 = LEFT, TOP + ph
    out.append(f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line class="axis" x1="{x0}" y1="{TOP}" x2="{x0}" y2="{y0}" stroke="black"/>')
    v = 0.0
    while v <= top + 1e-12:
        out.append(f'<line class="tick" x1="{x0 - 4}" y1="{_f(y(v))}" x2="{x0}" '
                   f'y2="{_f(y(v))}" stroke="black"/>')
        out.append(f'<text x="{x0 - 7}" y="{_f(y(v) + 4)}" text-anchor="end">{v:.3g}</text>')
        v += step
    tick_every = max(1, math.ceil(K / 20))
    for k in range(1, K + 1):
        if k % tick_every == 0 or k == 1:
            out.append(f'<text x="{_f(x(k))}" y="{y0 + 16}" text-anchor="middle">{k}</text>')
    for k, r in enumerate(rho, start=1):
        out.append(f'<line class="stem" x1="{_f(x(k))}" y1="{_f(y0)}" x2="{_f(x(k))}" '
                   f'y2="{_f(y(r))}" stroke="black" stroke-width="2"/>')
        out.append(f'<circle class="marker" cx="{_f(x(k))}" cy="{_f(y(r))}" r="3" fill="black"/>')
    if ub is not None:
        out.append(f'<line class="bound" x1="{x0}" y1="{_f(y(ub))}" x2="{x0 + pw}" '
                   f'y2="{_f(y(ub))}" stroke="gray" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{x0 + pw / 2:.2f}" y="{HEIGHT - 16}" text-anchor="middle">lag</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">rho</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_figure(acf: Autocorrelogram, path, title: str | None = None) -> None:
    with _open(path, "w") as fh:
        fh.write(render_svg(acf, title))
