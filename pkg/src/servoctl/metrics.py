"""Step-response performance metrics.

All threshold crossings are linearly interpolated between bracketing
samples.  The settling band is taken around the final value rather than
the reference, so a biased but convergent response still settles.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from servoctl.errors import NonSettled, ServoctlError
from servoctl.simulate import Trajectory

TAIL_FRACTION = 0.01
FLATNESS = 0.01
MONOTONE_TOL = 1e-9


@dataclass
class MetricsReport:
    overshoot_pct: Optional[float] = None
    sse: Optional[float] = None
    settling_time: Optional[float] = None
    rise_time: Optional[float] = None
    peak_time: Optional[float] = None
    final_value: Optional[float] = None
    monotone: bool = False
    errors: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def final_value(tr: Trajectory) -> float:
    """Mean of the last 1% of samples; raises NonSettled if that tail is not flat."""
    y = np.asarray(tr.y)
    n_tail = max(1, math.ceil(TAIL_FRACTION * len(y)))
    tail = y[-n_tail:]
    mean = float(np.mean(tail))
    spread = float(np.ptp(tail))
    if spread > FLATNESS * abs(mean):
        raise NonSettled(f"tail peak-to-peak {spread:.3g} exceeds 1% of final value {mean:.3g}")
    return mean


def overshoot(tr: Trajectory) -> float:
    """Percent by which the maximum exceeds the final value (never negative)."""
    yf = final_value(tr)
    ymax = float(np.max(tr.y))
    if yf == 0.0 and ymax == 0.0:
        return 0.0
    if yf <= 0.0:
        raise ValueError(f"overshoot needs a positive final value, got {yf:.3g}")
    return max(0.0, (ymax - yf) / yf * 100.0)


def steady_state_error(tr: Trajectory) -> float:
    return abs(float(tr.r[-1]) - final_value(tr))


def _interp(t, y, k, level) -> float:
    # crossing of ``level`` between samples k-1 and k
    y0, y1 = y[k - 1], y[k]
    if y1 == y0:
        return float(t[k])
    return float(t[k - 1] + (level - y0) / (y1 - y0) * (t[k] - t[k - 1]))


def settling_time(tr: Trajectory, band_pct: float = 2.0) -> float:
    """Time after which the response stays inside +/- band_pct % of its final value."""
    if band_pct <= 0:
        raise ValueError("band_pct must be positive")
    t, y = np.asarray(tr.t), np.asarray(tr.y)
    yf = final_value(tr)
    band = band_pct / 100.0 * abs(yf)
    outside = np.flatnonzero(np.abs(y - yf) > band)
    if outside.size == 0:
        return float(t[0])
    k = int(outside[-1])
    if k == len(y) - 1:
        raise NonSettled(f"response still outside the {band_pct}% band at t={t[-1]:g}")
    edge = yf + math.copysign(band, y[k] - yf)
    return _interp(t, y, k + 1, edge)


def _first_crossing(t, y, level) -> float:
    hits = np.flatnonzero(y >= level)
    if hits.size == 0:
        raise NonSettled(f"level {level:.3g} never reached")
    k = int(hits[0])
    return float(t[0]) if k == 0 else _interp(t, y, k, level)


def rise_time(tr: Trajectory, lo: float = 0.1, hi: float = 0.9) -> float:
    """Time from ``lo`` to ``hi`` fraction of the final value."""
    if not 0 <= lo < hi <= 1:
        raise ValueError("need 0 <= lo < hi <= 1")
    yf = final_value(tr)
    if yf <= 0:
        raise ValueError(f"rise time needs a positive final value, got {yf:.3g}")
    t, y = np.asarray(tr.t), np.asarray(tr.y)
    return _first_crossing(t, y, hi * yf) - _first_crossing(t, y, lo * yf)


def peak(tr: Trajectory) -> tuple[float, bool]:
    """(peak time, monotone flag).

    A response whose maximum is its last sample, to within a relative
    1e-9, is flagged monotone and reports the horizon.
    """
    t, y = np.asarray(tr.t), np.asarray(tr.y)
    if len(y) == 0:
        raise ValueError("empty trajectory")
    ymax = float(np.max(y))
    if ymax - y[-1] <= MONOTONE_TOL * max(abs(ymax), abs(y[-1])):
        return float(t[-1]), True
    return float(t[int(np.argmax(y))]), False


def peak_time(tr: Trajectory) -> float:
    return peak(tr)[0]


def full_report(tr: Trajectory, band_pct: float = 2.0, rise_levels: tuple[float, float] = (0.1, 0.9)) -> MetricsReport:
    """All metrics at once; a failing metric is recorded in ``errors`` instead of raising."""
    rep = MetricsReport()

    def attempt(name, fn):
        try:
            setattr(rep, name, fn())
        except (ServoctlError, ValueError) as exc:
            rep.errors[name] = f"{type(exc).__name__}: {exc}"

    attempt("final_value", lambda: final_value(tr))
    attempt("overshoot_pct", lambda: overshoot(tr))
    attempt("sse", lambda: steady_state_error(tr))
    attempt("settling_time", lambda: settling_time(tr, band_pct))
    attempt("rise_time", lambda: rise_time(tr, *rise_levels))
    try:
        rep.peak_time, rep.monotone = peak(tr)
    except ValueError as exc:
        rep.errors["peak_time"] = f"{type(exc).__name__}: {exc}"
    return rep
