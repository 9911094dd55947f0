"""Deterministic text, CSV and SVG output."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from servoctl.metrics import MetricsReport
from servoctl.simulate import Trajectory

ROWS = (
    ("Maximum overshoot (%)", "overshoot_pct"),
    ("Steady-state error", "sse"),
    ("Settling time (sec)", "settling_time"),
    ("Rise time (sec)", "rise_time"),
    ("Peak time (sec)", "peak_time"),
)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
WIDTH, HEIGHT = 900, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 170, 50, 70
MAX_POINTS = 2000


def format_table(labels: Sequence[str], reports: Sequence[MetricsReport]) -> str:
    """Metric-by-controller table with values rounded to two decimals."""
    width = max(10, *(len(l) + 2 for l in labels))
    head = f"{'Metric':<24}" + "".join(f"{l:>{width}}" for l in labels)
    lines = [head, "-" * len(head)]
    monotone = False
    for title, key in ROWS:
        cells = []
        for rep in reports:
            v = getattr(rep, key)
            if v is None:
                cells.append("n/a")
                continue
            cell = f"{v:.2f}"
            if key == "peak_time" and rep.monotone:
                cell += "*"
                monotone = True
            cells.append(cell)
        lines.append(f"{title:<24}" + "".join(f"{c:>{width}}" for c in cells))
    if monotone:
        lines.append("* monotone response: no interior peak, horizon reported")
    for label, rep in zip(labels, reports):
        for key, msg in sorted(rep.errors.items()):
            lines.append(f"! {label}.{key}: {msg}")
    return "\n".join(lines) + "\n"


def _g17(v: float) -> str:
    return f"{v:.17g}"


def write_csv(tr: Trajectory, path: Path) -> None:
    """Columns t,r,u,y at 17 significant digits; u left empty when undefined."""
    u = tr.u
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,r,u,y\n")
        for k in range(len(tr.t)):
            uk = "" if u is None else _g17(u[k])
            fh.write(f"{_g17(tr.t[k])},{_g17(tr.r[k])},{uk},{_g17(tr.y[k])}\n")


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10) + 0.0)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _decimate(n: int) -> np.ndarray:
    if n <= MAX_POINTS:
        return np.arange(n)
    idx = np.arange(0, n, int(math.ceil(n / MAX_POINTS)))
    return idx if idx[-1] == n - 1 else np.append(idx, n - 1)


def render_svg(trajectories: Sequence[Trajectory], title: str = "Step response") -> str:
    """Overlay of every trajectory, plus the reference, on a fixed 900x600 canvas."""
    t_max = max(float(tr.t[-1]) for tr in trajectories)
    y_all = np.concatenate([np.asarray(tr.y) for tr in trajectories] + [np.asarray(trajectories[0].r)])
    y_lo = min(0.0, float(np.min(y_all)))
    y_hi = float(np.max(y_all))
    y_hi = y_lo + 1.0 if y_hi <= y_lo else y_hi + 0.05 * (y_hi - y_lo)
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(t):
        return MARGIN_LEFT + t / t_max * pw

    def sy(y):
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_LEFT + pw / 2:.2f}" y="30" text-anchor="middle" font-family="sans-serif" '
        f'font-size="18">{title}</text>',
    ]
    out.append('<g id="grid" stroke="#dddddd" stroke-width="1">')
    xt, yt = _ticks(0.0, t_max), _ticks(y_lo, y_hi)
    for v in xt:
        out.append(f'<line x1="{_fmt(sx(v))}" y1="{MARGIN_TOP}" x2="{_fmt(sx(v))}" y2="{MARGIN_TOP + ph}"/>')
    for v in yt:
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{_fmt(sy(v))}" x2="{MARGIN_LEFT + pw}" y2="{_fmt(sy(v))}"/>')
    out.append("</g>")
    out.append('<g id="axes" stroke="black" stroke-width="1.5" fill="none">')
    out.append(f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}"/>')
    out.append("</g>")
    out.append('<g id="ticks" font-family="sans-serif" font-size="12" fill="black">')
    for v in xt:
        out.append(f'<text x="{_fmt(sx(v))}" y="{MARGIN_TOP + ph + 18}" text-anchor="middle">{v:g}</text>')
    for v in yt:
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{v:g}</text>')
    out.append(
        f'<text x="{MARGIN_LEFT + pw / 2:.2f}" y="{HEIGHT - 20}" text-anchor="middle" font-size="14">Time (s)</text>'
    )
    out.append(
        f'<text x="20" y="{MARGIN_TOP + ph / 2:.2f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {MARGIN_TOP + ph / 2:.2f})">Position (rad)</text>'
    )
    out.append("</g>")

    ref = trajectories[0]
    idx = _decimate(len(ref.t))
    pts = " ".join(f"{_fmt(sx(ref.t[k]))},{_fmt(sy(ref.r[k]))}" for k in idx)
    out.append(f'<polyline id="reference" points="{pts}" fill="none" stroke="black" stroke-width="1.2" '
               f'stroke-dasharray="6,4"/>')
    for i, tr in enumerate(trajectories):
        idx = _decimate(len(tr.t))
        pts = " ".join(f"{_fmt(sx(tr.t[k]))},{_fmt(sy(tr.y[k]))}" for k in idx)
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline id="trace-{i}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.8">'
                   f'<title>{tr.label}</title></polyline>')

    lx = MARGIN_LEFT + pw + 20
    out.append('<g id="legend" font-family="sans-serif" font-size="13">')
    entries = [("Reference", "black", True)] + [
        (tr.label, PALETTE[i % len(PALETTE)], False) for i, tr in enumerate(trajectories)
    ]
    for j, (label, color, dashed) in enumerate(entries):
        y = MARGIN_TOP + 20 + 24 * j
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 28}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 36}" y="{y + 4}">{label}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
