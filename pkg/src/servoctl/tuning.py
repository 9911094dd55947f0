"""Closed-loop Ziegler-Nichols tuning.

The critical (ultimate) gain is located by bisection on a pole-based
stability test of the unity-feedback proportional loop, so any strictly
proper plant works without building a Routh table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from servoctl.errors import ImproperSystem, NoCriticalGain
from servoctl.lti import TransferFunction
from servoctl.numerics import Polynomial, poly_roots

STABILITY_MARGIN = 1e-9
BRACKET = (1e-6, 1e9)

ZN_RULES = {
    # kind: (kp / k_cr, p_cr / ti or None, p_cr / td or None)
    "P": (0.5, None, None),
    "PI": (0.45, 1.2, None),
    "PID": (0.6, 2.0, 8.0),
}


@dataclass(frozen=True)
class CriticalPoint:
    k_cr: float
    omega_cr: float

    @property
    def p_cr(self) -> float:
        return 2 * math.pi / self.omega_cr


@dataclass(frozen=True)
class PidGains:
    """Standard-form PID gains; ``ti=None`` means no integral action."""

    kp: float
    ti: Optional[float] = None
    td: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kp) and self.kp > 0):
            raise ValueError(f"kp must be positive, got {self.kp}")
        if self.ti is not None and not (math.isfinite(self.ti) and self.ti > 0):
            raise ValueError(f"ti must be positive or None, got {self.ti}")
        if not (math.isfinite(self.td) and self.td >= 0):
            raise ValueError(f"td must be non-negative, got {self.td}")

    @property
    def has_integral(self) -> bool:
        return self.ti is not None


def is_stable_poly(p: Polynomial, margin: float = STABILITY_MARGIN) -> bool:
    """True when every root has real part < -margin * (1 + |imag|)."""
    if p.degree == 0:
        return True
    return all(r.real < -margin * (1 + abs(r.imag)) for r in poly_roots(p))


def _loop_char(plant: TransferFunction, k: float) -> Polynomial:
    return plant.den + plant.num * k


def critical_gain(plant: TransferFunction, bracket: tuple[float, float] = BRACKET) -> CriticalPoint:
    """Smallest proportional gain that puts the unity-feedback loop on the verge of oscillation."""
    if not plant.is_strictly_proper():
        raise ImproperSystem("critical gain search needs a strictly proper plant")
    lo, hi = bracket
    if not is_stable_poly(_loop_char(plant, lo)):
        raise NoCriticalGain(f"loop already unstable at gain {lo:g}")

    stable_k, unstable_k = lo, None
    k = lo
    while k < hi:
        k = min(k * 10.0, hi)
        if is_stable_poly(_loop_char(plant, k)):
            stable_k = k
        else:
            unstable_k = k
            break
    if unstable_k is None:
        raise NoCriticalGain(f"loop stable for every gain in [{lo:g}, {hi:g}]")

    a, b = stable_k, unstable_k
    for _ in range(200):
        mid = 0.5 * (a + b)
        if is_stable_poly(_loop_char(plant, mid)):
            a = mid
        else:
            b = mid
        if b - a <= 1e-15 * b:
            break
    k_cr = 0.5 * (a + b)

    roots = poly_roots(_loop_char(plant, k_cr))
    crossing = max(roots, key=lambda r: r.real)
    omega = abs(crossing.imag)
    if omega == 0.0 or abs(crossing.real) > 1e-6 * omega:
        raise NoCriticalGain(f"instability at gain {k_cr:g} is not oscillatory (root {crossing})")
    return CriticalPoint(k_cr=k_cr, omega_cr=omega)


def zn_gains(cp: CriticalPoint, kind: str) -> PidGains:
    try:
        kp_ratio, ti_div, td_div = ZN_RULES[kind]
    except KeyError:
        raise ValueError(f"unknown controller kind {kind!r}; expected one of {sorted(ZN_RULES)}") from None
    ti = None if ti_div is None else cp.p_cr / ti_div
    td = 0.0 if td_div is None else cp.p_cr / td_div
    return PidGains(kp=kp_ratio * cp.k_cr, ti=ti, td=td)
