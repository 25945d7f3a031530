"""Minimal in-core SVG plotting for simulation traces.

Three stacked panels (states, gains, parameter) with axes, tick grids, and
legends, emitted as plain polylines. Rendering is a pure view of the trace
arrays: deterministic formatting, no plotting dependency, and no effect on
any numerical artifact. Long traces are decimated by a uniform index stride
purely for file size.
"""

from __future__ import annotations

import math

import numpy as np

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#e377c2",
)

_PANEL_W = 760.0
_PANEL_H = 200.0
_MARGIN_L = 64.0
_MARGIN_R = 24.0
_MARGIN_TOP = 34.0
_PANEL_GAP = 46.0
_MAX_POINTS = 2000


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _px(v: float) -> str:
    return f"{v:.2f}"


def _data_range(arr: np.ndarray) -> tuple[float, float]:
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    if hi - lo < 1e-12:
        pad = max(1e-6, abs(lo) * 0.1, 1.0)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _panel(
    t: np.ndarray,
    series: list[tuple[str, np.ndarray]],
    title: str,
    y_top: float,
    vlines: list[float],
) -> list[str]:
    x0, y0 = _MARGIN_L, y_top
    w, h = _PANEL_W, _PANEL_H
    tmin, tmax = float(t[0]), float(t[-1])
    if tmax - tmin < 1e-12:
        tmax = tmin + 1.0
    ys = np.concatenate([s for _, s in series])
    ymin, ymax = _data_range(ys)

    def sx(tv: float) -> float:
        return x0 + (tv - tmin) / (tmax - tmin) * w

    def sy(yv: float) -> float:
        return y0 + h - (yv - ymin) / (ymax - ymin) * h

    parts = [f'<g font-family="sans-serif" font-size="12">']
    parts.append(
        f'<text x="{_px(x0)}" y="{_px(y0 - 10)}" font-size="14" fill="#222">{title}</text>'
    )
    parts.append(
        f'<rect x="{_px(x0)}" y="{_px(y0)}" width="{_px(w)}" height="{_px(h)}" '
        f'fill="none" stroke="#444" stroke-width="1"/>'
    )
    for tick in np.linspace(tmin, tmax, 6):
        px = sx(tick)
        parts.append(
            f'<line x1="{_px(px)}" y1="{_px(y0)}" x2="{_px(px)}" y2="{_px(y0 + h)}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_px(px)}" y="{_px(y0 + h + 16)}" text-anchor="middle" '
            f'fill="#444">{_fmt(tick)}</text>'
        )
    for tick in np.linspace(ymin, ymax, 5):
        py = sy(tick)
        parts.append(
            f'<line x1="{_px(x0)}" y1="{_px(py)}" x2="{_px(x0 + w)}" y2="{_px(py)}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_px(x0 - 6)}" y="{_px(py + 4)}" text-anchor="end" '
            f'fill="#444">{_fmt(tick)}</text>'
        )
    for tv in vlines:
        if tmin <= tv <= tmax:
            px = sx(tv)
            parts.append(
                f'<line x1="{_px(px)}" y1="{_px(y0)}" x2="{_px(px)}" y2="{_px(y0 + h)}" '
                f'stroke="#999" stroke-width="1" stroke-dasharray="4 3"/>'
            )
    for idx, (label, yvals) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_px(sx(tv))},{_px(sy(yv))}" for tv, yv in zip(t, yvals))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        lx = x0 + w - 78.0 * (len(series) - idx)
        parts.append(
            f'<line x1="{_px(lx)}" y1="{_px(y0 - 14)}" x2="{_px(lx + 18)}" y2="{_px(y0 - 14)}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_px(lx + 22)}" y="{_px(y0 - 10)}" fill="#222">{label}</text>'
        )
    parts.append(
        f'<text x="{_px(x0 + w / 2)}" y="{_px(y0 + h + 32)}" text-anchor="middle" '
        f'fill="#222">t [s]</text>'
    )
    parts.append("</g>")
    return parts


def render_trace_svg(trace) -> str:
    """SVG with state, gain, and parameter panels for a simulation trace."""
    stride = max(1, int(math.ceil(len(trace.times) / _MAX_POINTS)))
    sel = np.arange(0, len(trace.times), stride)
    if sel[-1] != len(trace.times) - 1:
        sel = np.append(sel, len(trace.times) - 1)
    t = trace.times[sel]
    switch_times = [float(ev["t"]) for ev in trace.events if ev.get("kind") == "switch"]

    panels: list[tuple[str, list[tuple[str, np.ndarray]]]] = []
    panels.append(
        ("states x(t)", [(f"x{i + 1}", trace.x[sel, i]) for i in range(trace.x.shape[1])])
    )
    panels.append(
        ("gains K(t)", [(f"K{i + 1}", trace.k[sel, i]) for i in range(trace.k.shape[1])])
    )
    panels.append(
        (
            "parameter rho(t)",
            [(f"rho{i + 1}", trace.rho[sel, i]) for i in range(trace.rho.shape[1])],
        )
    )

    total_h = _MARGIN_TOP + len(panels) * (_PANEL_H + _PANEL_GAP) + 10.0
    total_w = _MARGIN_L + _PANEL_W + _MARGIN_R
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_px(total_w)}" '
        f'height="{_px(total_h)}" viewBox="0 0 {_px(total_w)} {_px(total_h)}">',
        f'<rect x="0" y="0" width="{_px(total_w)}" height="{_px(total_h)}" fill="white"/>',
    ]
    y = _MARGIN_TOP
    for title, series in panels:
        if not series:
            continue
        out.extend(_panel(t, series, title, y, switch_times))
        y += _PANEL_H + _PANEL_GAP
    out.append("</svg>")
    return "\n".join(out) + "\n"
