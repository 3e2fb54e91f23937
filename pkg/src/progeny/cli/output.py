"""Deterministic CSV and SVG emission.

CSV: RFC-4180-style quoting, '\\n' line endings, '.' decimal separator,
17 significant digits for reals.  SVG: a single-file polyline chart with
axes and a legend, no timestamps or other run-dependent metadata, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_csv", "Series", "render_svg"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(rows, schema, path) -> None:
    """Write rows under the given header; every row must match its width."""
    schema = list(schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(schema)
        for i, row in enumerate(rows):
            row = list(row)
            if len(row) != len(schema):
                raise ValueError(
                    f"row {i} has {len(row)} fields, schema {schema} has {len(schema)}"
                )
            writer.writerow([format_value(v) for v in row])


@dataclass(frozen=True)
class Series:
    """One polyline: label plus x/y samples (NaNs break the line)."""

    label: str
    x: np.ndarray
    y: np.ndarray


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 20, 40, 50  # margins


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        out.append(t)
        t += step
    return out


def render_svg(series, path, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Render line series to a minimal, byte-stable SVG chart."""
    series = list(series)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series]) if series else np.array([0.0])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series]) if series else np.array([0.0])
    xs = xs[np.isfinite(xs)]
    ys = ys[np.isfinite(ys)]
    x_lo, x_hi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v: float) -> float:
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v: float) -> float:
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{_esc(title)}</text>'
        )
    # axes
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>'
    )
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>')
    for t in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{px(t):.2f}" y1="{_H - _MB}" x2="{px(t):.2f}" y2="{_H - _MB + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px(t):.2f}" y="{_H - _MB + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(t):.2f}" x2="{_ML}" y2="{py(t):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py(t):.2f}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{_esc(xlabel)}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">{_esc(ylabel)}</text>'
        )
    # polylines
    for k, s in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = []
        for xv, yv in zip(np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)):
            if math.isfinite(xv) and math.isfinite(yv):
                pts.append(f"{px(xv):.2f},{py(yv):.2f}")
        if pts:
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{" ".join(pts)}"/>'
            )
    # legend
    for k, s in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        ly = _MT + 14 + 18 * k
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly}" x2="{_W - _MR - 125}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 118}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{_esc(s.label)}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
