"""A minimal line-plot writer: polylines, axes, ticks and a legend, as plain SVG text."""
from __future__ import annotations

import numpy as np

_COLORS = ("#1f5fa8", "#c0392b", "#2e8b57", "#7d3c98", "#555555")
_DASH = {"solid": "", "dashed": "6,4", "dotted": "1.5,3", "points": None}


def _ticks(lo, hi, n=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + 0.5 * step, step) if lo - 1e-12 <= v <= hi + 1e-12]


def line_plot(series, title="", xlabel="", ylabel="", width=640, height=400) -> str:
    """SVG text for ``series``: a list of dicts with keys x, y, label and optional style.

    style is one of solid, dashed, dotted, points. NaN samples break the line.
    """
    ml, mr, mt, mb = 70, 20, 36, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = float(xs[ok].min()), float(xs[ok].max())
    y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    x1 = x1 if x1 > x0 else x0 + 1.0

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{ml}" y1="{py(0):.2f}" x2="{ml + pw}" y2="{py(0):.2f}" stroke="#bbbbbb"/>')
    for i, s in enumerate(series):
        color = s.get("color", _COLORS[i % len(_COLORS)])
        style = s.get("style", "solid")
        x = np.asarray(s["x"], float)
        y = np.asarray(s["y"], float)
        good = np.isfinite(x) & np.isfinite(y)
        if style == "points":
            for a, b in zip(x[good], y[good]):
                out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="1.6" fill="{color}"/>')
        else:
            # split at NaN gaps
            breaks = np.nonzero(~good)[0]
            for seg in np.split(np.arange(x.size), breaks):
                seg = seg[good[seg]]
                if seg.size < 2:
                    continue
                pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[seg], y[seg]))
                dash = f' stroke-dasharray="{_DASH[style]}"' if _DASH.get(style) else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"{dash}/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw - 150}" y1="{ly - 4}" x2="{ml + pw - 125}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw - 120}" y="{ly}">{_esc(s.get("label", ""))}</text>')
    out.append(f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">{_esc(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
