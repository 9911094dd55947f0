"""Motor model, transfer functions, state-space realizations and loop algebra."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from servoctl.errors import ConfigError, DimensionMismatch, ImproperSystem, InvalidPolynomial, PoleAtOrigin
from servoctl.numerics import MAX_ORDER, Polynomial, as_matrix, poly_roots


@dataclass(frozen=True)
class MotorParams:
    """Physical constants of an armature-controlled DC servo motor.

    ``K`` serves as both torque constant and back-emf constant.
    """

    R: float = 2.45  # armature resistance, ohm
    L: float = 0.035  # armature inductance, H
    K: float = 1.2  # N*m/A == V*s/rad
    J: float = 0.022  # rotor inertia, kg*m^2
    b: float = 0.0005  # viscous damping, N*m*s/rad

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v) or v <= 0:
                raise ConfigError(f"motor.{f.name} must be a finite positive number, got {v!r}")
            object.__setattr__(self, f.name, float(v))


DEFAULT_MOTOR = MotorParams()


@dataclass(frozen=True, eq=False)
class TransferFunction:
    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        num = self.num if isinstance(self.num, Polynomial) else Polynomial(self.num)
        den = self.den if isinstance(self.den, Polynomial) else Polynomial(self.den)
        if den.is_zero():
            raise InvalidPolynomial("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, s):
        return self.num(s) / self.den(s)

    @property
    def relative_degree(self) -> int:
        if self.num.is_zero():
            return self.den.degree
        return self.den.degree - self.num.degree

    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    def is_strictly_proper(self) -> bool:
        return self.relative_degree >= 1

    def poles(self) -> list[complex]:
        return poly_roots(self.den) if self.den.degree else []

    def zeros(self) -> list[complex]:
        return poly_roots(self.num) if self.num.degree else []

    def normalized(self) -> TransferFunction:
        """Copy with a monic denominator; the stored instance is untouched."""
        lead = self.den.leading
        return TransferFunction(self.num * (1.0 / lead), self.den * (1.0 / lead))

    def __repr__(self) -> str:
        return f"TransferFunction(num={self.num.coeffs.tolist()}, den={self.den.coeffs.tolist()})"


@dataclass(frozen=True, eq=False)
class StateSpace:
    """SISO realization ``x' = A x + B u``, ``y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.A, dtype=float)
        a = np.zeros((0, 0)) if a.size == 0 else np.atleast_2d(a)
        n = a.shape[0]
        try:
            b = np.asarray(self.B, dtype=float).reshape(n, -1) if n else np.zeros((0, 1))
            c = np.asarray(self.C, dtype=float).reshape(-1, n) if n else np.zeros((1, 0))
            d = np.asarray(self.D, dtype=float).reshape(1, -1)
        except ValueError as exc:
            raise DimensionMismatch(str(exc)) from None
        if a.shape != (n, n) or b.shape != (n, 1) or c.shape != (1, n) or d.shape != (1, 1):
            raise DimensionMismatch(f"inconsistent shapes A{a.shape} B{b.shape} C{c.shape} D{d.shape}")
        if n > MAX_ORDER:
            raise DimensionMismatch(f"order {n} exceeds {MAX_ORDER}")
        for name, m in zip("ABCD", (a, b, c, d)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def order(self) -> int:
        return self.A.shape[0]


def motor_to_tf(p: MotorParams) -> TransferFunction:
    """Voltage-to-angle transfer function K / (s((Ls + R)(Js + b) + K^2))."""
    den = [p.J * p.L, p.J * p.R + p.b * p.L, p.b * p.R + p.K**2, 0.0]
    return TransferFunction([p.K], den)


def motor_to_ss(p: MotorParams) -> StateSpace:
    """State-space model with states (angle, angular velocity, current)."""
    A = [
        [0.0, 1.0, 0.0],
        [0.0, -p.b / p.J, p.K / p.J],
        [0.0, -p.K / p.L, -p.R / p.L],
    ]
    B = [[0.0], [0.0], [1.0 / p.L]]
    C = [[1.0, 0.0, 0.0]]
    return StateSpace(A, B, C, [[0.0]])


def canonical_output(num: Polynomial, den: Polynomial) -> tuple[np.ndarray, np.ndarray]:
    """Output row and feedthrough realizing ``num/den`` on the canonical (A, B) of ``den``."""
    n = den.degree
    if num.degree > n and not num.is_zero():
        raise ImproperSystem(f"numerator degree {num.degree} exceeds denominator degree {n}")
    a = den.coeffs / den.leading
    b = np.zeros(n + 1)
    b[n + 1 - len(num.coeffs):] = num.coeffs / den.leading
    d = b[0]
    c = b[1:] - d * a[1:]
    return c.reshape(1, n), np.array([[d]])


def _canonical_ab(den: Polynomial) -> tuple[np.ndarray, np.ndarray]:
    n = den.degree
    a = den.coeffs / den.leading
    A = np.zeros((n, n))
    A[0, :] = -a[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    if n:
        B[0, 0] = 1.0
    return A, B


def tf_to_ss(g: TransferFunction) -> StateSpace:
    """Controllable canonical realization.

    When the strictly proper part vanishes, e.g. (s+2)/(s+2), the result is
    a static gain with no states.
    """
    if not g.is_proper():
        raise ImproperSystem(f"cannot realize improper {g!r}")
    C, D = canonical_output(g.num, g.den)
    if not np.any(C):
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), D)
    A, B = _canonical_ab(g.den)
    return StateSpace(A, B, C, D)


def ss_to_tf(sys: StateSpace) -> TransferFunction:
    """C (sI - A)^-1 B + D, with the resolvent expanded by Faddeev-LeVerrier."""
    n = sys.order
    d = float(sys.D[0, 0])
    if n == 0:
        return TransferFunction([d], [1.0])
    A, B, C = sys.A, sys.B, sys.C
    eye = np.eye(n)
    den = [1.0]
    terms = []
    M = eye
    for k in range(1, n + 1):
        terms.append((C @ M @ B).item())
        AM = A @ M
        ck = -np.trace(AM) / k
        den.append(ck)
        M = AM + ck * eye
    num = np.concatenate([[0.0], terms]) + d * np.asarray(den)
    return TransferFunction(num, den)


def unity_feedback(controller: TransferFunction, plant: TransferFunction) -> TransferFunction:
    """Reference-to-output transfer function of C*G / (1 + C*G).

    Unstable pole-zero cancellations between controller and plant are not
    detected.
    """
    num = controller.num * plant.num
    den = controller.den * plant.den + num
    closed = TransferFunction(num, den)
    if not closed.is_proper():
        raise ImproperSystem("closed loop is improper")
    return closed


def dc_gain(g: TransferFunction) -> float:
    d0 = float(g.den(0.0))
    if abs(d0) <= 1e-14 * float(np.max(np.abs(g.den.coeffs))):
        raise PoleAtOrigin("denominator vanishes at s=0; use the simulated final value")
    return float(g.num(0.0)) / d0
