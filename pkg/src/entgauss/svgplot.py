"""Minimal deterministic SVG line plots (polylines, axes, log ticks)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=30, bottom=50)
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
_DASHES = ["", "6,3", "2,3", "8,3,2,3"]


def _fmt(v):
    return f"{v:.2f}"


def _transform(values, log):
    out = []
    for v in values:
        if v is None or not math.isfinite(v) or (log and v <= 0.0):
            out.append(None)
        else:
            out.append(math.log10(v) if log else v)
    return out


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, int(math.ceil((b - a) / 8)))
        return [(float(k), f"1e{k}") for k in range(a, b + 1, step) if lo - 1e-9 <= k <= hi + 1e-9]
    span = hi - lo
    if span <= 0:
        return [(lo, f"{lo:g}")]
    raw = span / 6
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag)
    start = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while start + k * step <= hi + 1e-12 * span:
        v = start + k * step
        ticks.append((v, f"{v:.6g}"))
        k += 1
    return ticks


def line_plot(series, title="", xlabel="", ylabel="", xlog=False, ylog=False, markers=False):
    """Render ``series`` (list of ``(label, xs, ys)``) to an SVG document string.

    Non-finite points, and non-positive ones on log axes, break the line.
    """
    pts = []
    for label, xs, ys in series:
        pts.append((label, _transform(xs, xlog), _transform(ys, ylog)))
    allx = [x for _, xs, ys in pts for x, y in zip(xs, ys) if x is not None and y is not None]
    ally = [y for _, xs, ys in pts for x, y in zip(xs, ys) if x is not None and y is not None]
    if not allx:
        allx, ally = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="black"/>',
    ]
    for v, text in _ticks(x0, x1, xlog):
        X = sx(v)
        out.append(f'<line x1="{_fmt(X)}" y1="{_fmt(MARGIN["top"] + ph)}" x2="{_fmt(X)}" '
                   f'y2="{_fmt(MARGIN["top"] + ph + 5)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{_fmt(MARGIN["top"] + ph + 18)}" '
                   f'text-anchor="middle">{escape(text)}</text>')
    for v, text in _ticks(y0, y1, ylog):
        Y = sy(v)
        out.append(f'<line x1="{_fmt(MARGIN["left"] - 5)}" y1="{_fmt(Y)}" x2="{_fmt(MARGIN["left"])}" '
                   f'y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(MARGIN["left"] - 8)}" y="{_fmt(Y + 4)}" '
                   f'text-anchor="end">{escape(text)}</text>')
    for k, (label, xs, ys) in enumerate(pts):
        color = _COLORS[k % len(_COLORS)]
        dash = _DASHES[(k // len(_COLORS)) % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        run = []
        runs = []
        for x, y in zip(xs, ys):
            if x is None or y is None:
                if run:
                    runs.append(run)
                run = []
            else:
                run.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
        if run:
            runs.append(run)
        for r in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} '
                       f'points="{" ".join(r)}"/>')
            if markers:
                for p in r:
                    cx, cy = p.split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
        ly = MARGIN["top"] + 14 + 16 * k
        lx = MARGIN["left"] + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 25}" y="{ly + 4}">{escape(label)}</text>')
    if title:
        out.append(f'<text x="{_fmt(MARGIN["left"] + pw / 2)}" y="18" text-anchor="middle" '
                   f'font-size="13">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{_fmt(MARGIN["left"] + pw / 2)}" y="{HEIGHT - 10}" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{_fmt(MARGIN["top"] + ph / 2)}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {_fmt(MARGIN["top"] + ph / 2)})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
