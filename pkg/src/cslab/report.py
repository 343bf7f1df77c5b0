"""Report artifacts: CSV tables, versioned JSON summaries, and SVG plots.

Everything here is deterministic in its inputs; the byte-identical-output
guarantee across worker counts rests on the estimators, not on this module.
SVGs are written directly as polylines, no plotting dependency.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

SCHEMA_VERSION = 1

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def format_value(v) -> str:
    """CSV cell: floats at up to 17 significant digits, text as-is."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_report_json(path, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION}
    body.update(payload)
    Path(path).write_text(
        json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n",
        encoding="utf-8",
    )


def _json_default(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON-serializable: {type(v)!r}")


def _ticks(lo: float, hi: float, log: bool) -> np.ndarray:
    if log:
        lo_e, hi_e = np.floor(np.log10(lo)), np.ceil(np.log10(hi))
        decades = np.arange(lo_e, hi_e + 1)
        if decades.size > 7:
            decades = decades[:: int(np.ceil(decades.size / 7))]
        return 10.0**decades
    span = hi - lo
    if span <= 0:
        return np.array([lo])
    step = 10.0 ** np.floor(np.log10(span / 4.0))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= 6:
            step *= mult
            break
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step / 2.0, step)


class _Axis:
    def __init__(self, lo: float, hi: float, px_lo: float, px_hi: float, log: bool):
        if log and lo <= 0.0:
            raise ValueError("log axis needs positive data")
        pad = 0.05 * ((np.log10(hi / lo)) if log else (hi - lo)) or 0.5
        if log:
            self.lo, self.hi = lo / 10**pad, hi * 10**pad
        else:
            self.lo, self.hi = lo - pad, hi + pad
        self.px_lo, self.px_hi, self.log = px_lo, px_hi, log

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self.log:
            frac = (np.log10(v) - np.log10(self.lo)) / (np.log10(self.hi) - np.log10(self.lo))
        else:
            frac = (v - self.lo) / (self.hi - self.lo)
        return self.px_lo + frac * (self.px_hi - self.px_lo)


def svg_line_plot(
    path,
    series: Sequence[tuple],
    title: str,
    xlabel: str,
    ylabel: str,
    xlog: bool = False,
    ylog: bool = False,
    width: int = 640,
    height: int = 420,
) -> None:
    """Polyline plot; series is a sequence of (x array, y array, label).

    Points with non-finite coordinates (or non-positive ones on a log axis)
    are dropped per-series before range fitting.
    """
    margin_l, margin_r, margin_t, margin_b = 64, 16, 34, 46
    cleaned = []
    for xs, ys, label in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        keep = np.isfinite(xs) & np.isfinite(ys)
        if xlog:
            keep &= xs > 0.0
        if ylog:
            keep &= ys > 0.0
        if np.any(keep):
            cleaned.append((xs[keep], ys[keep], label))
    if not cleaned:
        raise ValueError("nothing plottable in any series")
    all_x = np.concatenate([s[0] for s in cleaned])
    all_y = np.concatenate([s[1] for s in cleaned])
    ax = _Axis(float(all_x.min()), float(all_x.max()), margin_l, width - margin_r, xlog)
    ay = _Axis(float(all_y.min()), float(all_y.max()), height - margin_b, margin_t, ylog)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    x0, y0 = margin_l, height - margin_b
    x1, y1 = width - margin_r, margin_t
    parts.append(
        f'<path d="M {x0} {y1} L {x0} {y0} L {x1} {y0}" stroke="black" fill="none"/>'
    )
    for tv in _ticks(ax.lo, ax.hi, xlog):
        px = float(ax(tv))
        if not x0 <= px <= x1:
            continue
        parts.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0+4}" stroke="black"/>')
        parts.append(
            f'<text x="{px:.1f}" y="{y0+17}" text-anchor="middle">{tv:g}</text>'
        )
    for tv in _ticks(ay.lo, ay.hi, ylog):
        py = float(ay(tv))
        if not y1 <= py <= y0:
            continue
        parts.append(f'<line x1="{x0-4}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0-7}" y="{py+4:.1f}" text-anchor="end">{tv:g}</text>'
        )
    parts.append(
        f'<text x="{(x0+x1)/2:.0f}" y="{height-8}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0+y1)/2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0+y1)/2:.0f})">{ylabel}</text>'
    )
    for i, (xs, ys, label) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{float(px):.1f},{float(py):.1f}" for px, py in zip(ax(xs), ay(ys)))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = margin_t + 14 * i + 4
        parts.append(f'<line x1="{x1-110}" y1="{ly}" x2="{x1-90}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{x1-85}" y="{ly+4}">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
