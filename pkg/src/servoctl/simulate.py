"""Step-response simulation.

``step_response`` propagates the exact zero-order-hold discretization,
which is exact for step inputs.  ``rk4_response`` integrates the same
system with classical fourth-order Runge-Kutta and exists to cross-check
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from servoctl.design import ClosedLoop
from servoctl.errors import NumericalDivergence
from servoctl.lti import StateSpace
from servoctl.numerics import matrix_exp

DIVERGENCE_LIMIT = 1e150


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_final: float = 2.0
    step_amplitude: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final >= self.dt):
            raise ValueError(f"t_final must be >= dt, got {self.t_final}")
        if self.t_final / self.dt > 1e7:
            raise ValueError("t_final/dt exceeds 1e7 samples")
        if not math.isfinite(self.step_amplitude):
            raise ValueError("step_amplitude must be finite")

    @property
    def n_samples(self) -> int:
        # tolerate t_final/dt landing a hair below an integer
        return int(math.floor(self.t_final / self.dt + 1e-9)) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    u: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        n = len(self.t)
        if len(self.r) != n or len(self.y) != n or (self.u is not None and len(self.u) != n):
            raise ValueError("trajectory arrays must have equal length")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.t)


def discretize_zoh(sys: StateSpace, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """(Ad, Bd) from exp([[A, B], [0, 0]] dt)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = sys.order
    blk = np.zeros((n + 1, n + 1))
    blk[:n, :n] = sys.A
    blk[:n, n:] = sys.B
    e = matrix_exp(blk * dt)
    return e[:n, :n], e[:n, n:]


def _outputs(cl: ClosedLoop, x: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, Optional[np.ndarray]]:
    sys = cl.sys
    y = x @ sys.C[0] + sys.D[0, 0] * r
    u = None
    if cl.u_map is not None:
        cu, du = cl.u_map
        u = x @ np.asarray(cu)[0] + float(np.asarray(du).ravel()[0]) * r
    return y, u


def _check_finite(x: np.ndarray, t: np.ndarray, label: str):
    bad = ~np.all(np.isfinite(x) & (np.abs(x) < DIVERGENCE_LIMIT), axis=1)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NumericalDivergence(f"{label}: state diverged at sample {k} (t={t[k]:g})")


def step_response(cl: ClosedLoop, cfg: SimConfig = SimConfig()) -> Trajectory:
    t = cfg.times()
    r = np.full(t.shape, float(cfg.step_amplitude))
    n = cl.sys.order
    x = np.zeros((len(t), n))
    if n:
        ad, bd = discretize_zoh(cl.sys, cfg.dt)
        drive = bd[:, 0] * cfg.step_amplitude
        ad_t = ad.T
        xk = np.zeros(n)
        for k in range(1, len(t)):
            xk = xk @ ad_t + drive
            x[k] = xk
        _check_finite(x, t, cl.label)
    y, u = _outputs(cl, x, r)
    return Trajectory(t=t, r=r, y=y, u=u, label=cl.label)


def rk4_response(cl: ClosedLoop, cfg: SimConfig = SimConfig()) -> Trajectory:
    t = cfg.times()
    r = np.full(t.shape, float(cfg.step_amplitude))
    n = cl.sys.order
    x = np.zeros((len(t), n))
    if n:
        A = cl.sys.A
        f0 = cl.sys.B[:, 0] * cfg.step_amplitude
        h = cfg.dt
        xk = np.zeros(n)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, len(t)):
                k1 = A @ xk + f0
                k2 = A @ (xk + 0.5 * h * k1) + f0
                k3 = A @ (xk + 0.5 * h * k2) + f0
                k4 = A @ (xk + h * k3) + f0
                xk = xk + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                x[k] = xk
                if not np.all(np.abs(xk) < DIVERGENCE_LIMIT):
                    raise NumericalDivergence(f"{cl.label}: RK4 diverged at sample {k} (t={t[k]:g})")
    y, u = _outputs(cl, x, r)
    return Trajectory(t=t, r=r, y=y, u=u, label=cl.label)
