"""Closed-loop construction for the five controller families.

P, PI and PID loops are formed by transfer-function algebra around the
plant and realized in controllable canonical form.  State-feedback loops
(with and without an error integrator) are built directly in state space,
with gains from Ackermann's formula.

Sign conventions
----------------
* SFC:    u = r - kc @ x
* SFCIA:  w' = r - y,  u = -kc @ x + k_w * w
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from servoctl.errors import ImproperSystem, InvalidPoleSet, SingularMatrix, Uncontrollable, UnstableDesign
from servoctl.lti import StateSpace, TransferFunction, canonical_output, tf_to_ss, unity_feedback
from servoctl.numerics import controllability_matrix, eigenvalues, linear_solve, matrix_rank
from servoctl.tuning import STABILITY_MARGIN, PidGains

DEFAULT_SFC_POLES = (-15.0, -35.0 + 25.0j, -35.0 - 25.0j)
DEFAULT_SFCIA_POLES = (-30.0, -33.0, -36.0, -39.0)
# Position gain 10 gives a unit-step output of 0.1; speed/current gains
# chosen for ~2% overshoot.
SFC_K1_10_GAINS = (10.0, 0.0, 0.9)


@dataclass(frozen=True, eq=False)
class StateFeedbackGains:
    kc: np.ndarray
    ki: Optional[float] = None

    def __post_init__(self):
        kc = np.asarray(self.kc, dtype=float).ravel()
        if not np.all(np.isfinite(kc)):
            raise ValueError("state feedback gains must be finite")
        kc.setflags(write=False)
        object.__setattr__(self, "kc", kc)


@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """Reference-to-output system plus, where defined, a map to the control input.

    ``u_map`` is ``(Cu, Du)`` with ``u = Cu @ x + Du * r`` in the state
    coordinates of ``sys``.
    """

    sys: StateSpace
    kind: str
    label: str = ""
    u_map: Optional[tuple[np.ndarray, np.ndarray]] = None
    gains: Union[PidGains, StateFeedbackGains, None] = None
    poles: list = field(default_factory=list)

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.kind)


def controller_tf(g: PidGains) -> TransferFunction:
    """Ideal standard-form controller kp * (1 + 1/(ti s) + td s)."""
    if g.ti is None:
        return TransferFunction(np.array([g.td, 1.0]) * g.kp, [1.0])
    return TransferFunction(np.array([g.td * g.ti, g.ti, 1.0]) * g.kp, [g.ti, 0.0])


def _check_hurwitz(A: np.ndarray, what: str) -> list[complex]:
    poles = eigenvalues(A)
    bad = [p for p in poles if not p.real < -STABILITY_MARGIN * (1 + abs(p.imag))]
    if bad:
        raise UnstableDesign(f"{what}: closed loop not asymptotically stable, poles {bad}", poles)
    return poles


def _classical_loop(plant: TransferFunction, g: PidGains, kind: str, label: str) -> ClosedLoop:
    ctrl = controller_tf(g)
    closed = unity_feedback(ctrl, plant)
    sys = tf_to_ss(closed)
    # u/r = C/(1 + CG) shares the closed-loop denominator, so it reuses (A, B).
    u_num = ctrl.num * plant.den
    u_map = None
    if sys.order == closed.den.degree and u_num.degree <= closed.den.degree:
        u_map = canonical_output(u_num, closed.den)
    poles = _check_hurwitz(sys.A, kind)
    return ClosedLoop(sys=sys, kind=kind, label=label or kind, u_map=u_map, gains=g, poles=poles)


def build_p_loop(plant: TransferFunction, kp: float, label: str = "") -> ClosedLoop:
    return _classical_loop(plant, PidGains(kp=kp), "P", label)


def build_pi_loop(plant: TransferFunction, g: PidGains, label: str = "") -> ClosedLoop:
    if g.ti is None or g.td != 0.0:
        raise ValueError("PI loop needs a finite ti and td == 0")
    return _classical_loop(plant, g, "PI", label)


def build_pid_loop(plant: TransferFunction, g: PidGains, label: str = "") -> ClosedLoop:
    """Ideal PID in unity feedback.

    The reference-to-input map is improper, so ``u_map`` is always None.
    """
    if g.ti is None or g.td <= 0.0:
        raise ValueError("PID loop needs ti > 0 and td > 0")
    if plant.relative_degree < 2:
        raise ImproperSystem("ideal PID needs a plant of relative degree >= 2")
    cl = _classical_loop(plant, g, "PID", label)
    return ClosedLoop(sys=cl.sys, kind="PID", label=cl.label, u_map=None, gains=g, poles=cl.poles)


def check_pole_set(poles: Sequence[complex], n: int, tol: float = 1e-9) -> np.ndarray:
    """Validate a desired pole set and return it as an array.

    Raises :class:`InvalidPoleSet` unless there are exactly ``n`` finite
    poles closed under complex conjugation.
    """
    p = np.asarray(list(poles), dtype=complex)
    if p.shape != (n,):
        raise InvalidPoleSet(f"need {n} poles, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise InvalidPoleSet("poles must be finite")
    unmatched = [z for z in p if abs(z.imag) > tol * max(1.0, abs(z))]
    while unmatched:
        z = unmatched.pop()
        dist = [abs(w - z.conjugate()) for w in unmatched]
        if not dist or min(dist) > tol * max(1.0, abs(z)):
            raise InvalidPoleSet(f"pole {z} has no conjugate partner")
        unmatched.pop(int(np.argmin(dist)))
    return p


def ackermann_place(A, B, desired_poles: Sequence[complex]) -> np.ndarray:
    """Gain row K such that eig(A - B K) equals ``desired_poles``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    poles = check_pole_set(desired_poles, n)
    ctrb = controllability_matrix(A, B)
    if matrix_rank(ctrb) < n:
        raise Uncontrollable(f"(A, B) controllability rank {matrix_rank(ctrb)} < {n}")
    phi_coeffs = np.poly(poles).real
    phi = np.zeros_like(A)
    for c in phi_coeffs:
        phi = phi @ A + c * np.eye(n)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    try:
        z = linear_solve(ctrb.T, e_n)
    except SingularMatrix as exc:
        raise Uncontrollable(str(exc)) from None
    return (z @ phi).reshape(1, n)


def pole_mismatch(achieved: Sequence[complex], desired: Sequence[complex]) -> float:
    """Largest distance after greedy nearest-neighbour pairing."""
    left = list(desired)
    worst = 0.0
    for a in achieved:
        i = int(np.argmin([abs(a - d) for d in left]))
        worst = max(worst, abs(a - left.pop(i)))
    return worst


def build_sfc_loop(ss: StateSpace, kc, label: str = "") -> ClosedLoop:
    """Full state feedback u = r - kc @ x."""
    kc = np.asarray(kc, dtype=float).reshape(1, -1)
    if kc.shape[1] != ss.order:
        raise ValueError(f"kc must have {ss.order} entries, got {kc.shape[1]}")
    A = ss.A - ss.B @ kc
    C = ss.C - ss.D @ kc
    poles = _check_hurwitz(A, "SFC")
    sys = StateSpace(A, ss.B, C, ss.D)
    return ClosedLoop(
        sys=sys,
        kind="SFC",
        label=label or "SFC",
        u_map=(-kc, np.ones((1, 1))),
        gains=StateFeedbackGains(kc),
        poles=poles,
    )


def place_sfc_loop(ss: StateSpace, desired_poles: Sequence[complex], label: str = "") -> ClosedLoop:
    return build_sfc_loop(ss, ackermann_place(ss.A, ss.B, desired_poles), label)


def augment_integrator(ss: StateSpace) -> tuple[StateSpace, np.ndarray]:
    """Append the error integral w' = r - y as a last state.

    Returns the augmented (A_a, B_a, C_a, 0) and the reference column B_r.
    """
    if np.any(ss.D):
        raise ValueError("integral augmentation expects a strictly proper plant (D = 0)")
    n = ss.order
    Aa = np.zeros((n + 1, n + 1))
    Aa[:n, :n] = ss.A
    Aa[n, :n] = -ss.C
    Ba = np.vstack([ss.B, [[0.0]]])
    Ca = np.hstack([ss.C, [[0.0]]])
    Br = np.zeros((n + 1, 1))
    Br[n, 0] = 1.0
    return StateSpace(Aa, Ba, Ca, [[0.0]]), Br


def build_sfcia_loop(ss: StateSpace, desired_poles: Sequence[complex], label: str = "") -> ClosedLoop:
    """State feedback with an integrator on the tracking error."""
    poles = check_pole_set(desired_poles, ss.order + 1)
    if np.any(poles.real >= 0):
        raise InvalidPoleSet(f"SFCIA poles must be strictly stable, got {list(poles)}")
    aug, Br = augment_integrator(ss)
    Ka = ackermann_place(aug.A, aug.B, poles)
    A = aug.A - aug.B @ Ka
    achieved = _check_hurwitz(A, "SFCIA")
    n = ss.order
    gains = StateFeedbackGains(Ka[0, :n], ki=float(-Ka[0, n]))
    return ClosedLoop(
        sys=StateSpace(A, Br, aug.C, [[0.0]]),
        kind="SFCIA",
        label=label or "SFCIA",
        u_map=(-Ka, np.zeros((1, 1))),
        gains=gains,
        poles=achieved,
    )


def equilibrium_output(cl: ClosedLoop, r: float = 1.0) -> float:
    """Steady-state output for a constant reference, from 0 = A x + B r."""
    sys = cl.sys
    if sys.order == 0:
        return float(sys.D[0, 0]) * r
    x = linear_solve(-sys.A, sys.B[:, 0] * r)
    return float(sys.C[0] @ x + sys.D[0, 0] * r)
