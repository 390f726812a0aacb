"""Minimal SVG line plots: hand-rolled polylines with axes, ticks and a
legend, so figures need no plotting dependency.  Output is valid XML."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

WIDTH, HEIGHT = 720, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 40, 55


def _nice_ticks(lo: float, hi: float, target: int = 6):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    if v == 0.0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def line_plot(
    path,
    curves,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    y_window=None,
    zero_line: bool = True,
):
    """Write a multi-curve line plot.

    curves: iterable of (x, y, label).  y_window optionally clamps the
    vertical range (useful when curves dive to -inf near an endpoint);
    segments outside the plot area are clipped, not dropped.
    """
    curves = [(np.asarray(x, float), np.asarray(y, float), lbl) for x, y, lbl in curves]
    finite_x = np.concatenate([x[np.isfinite(x)] for x, _, _ in curves])
    finite_y = np.concatenate([y[np.isfinite(y)] for _, y, _ in curves])
    x_lo, x_hi = float(finite_x.min()), float(finite_x.max())
    if y_window is not None:
        y_lo, y_hi = y_window
    else:
        y_lo, y_hi = float(finite_y.min()), float(finite_y.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    iw = WIDTH - MARGIN_L - MARGIN_R
    ih = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * iw

    def sy(v):
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * ih

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        "<defs><clipPath id=\"plotarea\">"
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{iw}" height="{ih}"/>'
        "</clipPath></defs>",
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{iw}" height="{ih}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2}" y="{MARGIN_T - 14}" text-anchor="middle" '
            f'font-size="16" font-family="sans-serif">{escape(title)}</text>'
        )
    for tx in _nice_ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.2f}" y1="{MARGIN_T + ih}" x2="{px:.2f}" '
            f'y2="{MARGIN_T + ih + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{MARGIN_T + ih + 20}" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif">{_fmt(tx)}</text>'
        )
    for ty in _nice_ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" '
            f'y2="{py:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 9}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-size="12" font-family="sans-serif">{_fmt(ty)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{MARGIN_L + iw / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
            f'font-size="14" font-family="sans-serif">{escape(xlabel)}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="18" y="{MARGIN_T + ih / 2}" text-anchor="middle" font-size="14" '
            f'font-family="sans-serif" transform="rotate(-90 18 {MARGIN_T + ih / 2})">'
            f"{escape(ylabel)}</text>"
        )
    if zero_line and y_lo < 0.0 < y_hi:
        py = sy(0.0)
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{py:.2f}" x2="{MARGIN_L + iw}" y2="{py:.2f}" '
            'stroke="#999999" stroke-dasharray="4 4" stroke-width="1"/>'
        )

    for ci, (x, y, _label) in enumerate(curves):
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        color = PALETTE[ci % len(PALETTE)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5" clip-path="url(#plotarea)"/>'
        )

    ly = MARGIN_T + 12
    for ci, (_x, _y, label) in enumerate(curves):
        if not label:
            continue
        color = PALETTE[ci % len(PALETTE)]
        lx = MARGIN_L + iw - 110
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 30}" y="{ly}" font-size="12" '
            f'font-family="sans-serif">{escape(str(label))}</text>'
        )
        ly += 16

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))


def closed_curve_plot(path, curves, title: str = ""):
    """Equal-aspect overlay of closed boundary curves given as (x, y, label)."""
    closed = []
    for x, y, lbl in curves:
        x = np.append(np.asarray(x, float), x[0])
        y = np.append(np.asarray(y, float), y[0])
        closed.append((x, y, lbl))
    all_x = np.concatenate([c[0] for c in closed])
    all_y = np.concatenate([c[1] for c in closed])
    half = 1.05 * float(max(np.abs(all_x).max(), np.abs(all_y).max()))
    size = 560
    cx = cy = size / 2
    scale = (size / 2 - 30) / half

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{cx}" y="20" text-anchor="middle" font-size="15" '
            f'font-family="sans-serif">{escape(title)}</text>'
        )
    parts.append(
        f'<line x1="{cx - half * scale:.1f}" y1="{cy}" x2="{cx + half * scale:.1f}" '
        f'y2="{cy}" stroke="#dddddd"/>'
    )
    parts.append(
        f'<line x1="{cx}" y1="{cy - half * scale:.1f}" x2="{cx}" '
        f'y2="{cy + half * scale:.1f}" stroke="#dddddd"/>'
    )
    for ci, (x, y, label) in enumerate(closed):
        pts = " ".join(f"{cx + a * scale:.2f},{cy - b * scale:.2f}" for a, b in zip(x, y))
        color = PALETTE[ci % len(PALETTE)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            parts.append(
                f'<text x="12" y="{40 + 16 * ci}" font-size="12" fill="{color}" '
                f'font-family="sans-serif">{escape(str(label))}</text>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
