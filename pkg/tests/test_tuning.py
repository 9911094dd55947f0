import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PRINTED_DEN
from servoctl.design import ClosedLoop
from servoctl.errors import ImproperSystem, NoCriticalGain
from servoctl.lti import MotorParams, TransferFunction, motor_to_tf, tf_to_ss, unity_feedback
from servoctl.numerics import poly_roots
from servoctl.simulate import SimConfig, step_response
from servoctl.tuning import CriticalPoint, PidGains, critical_gain, zn_gains


def routh_cubic(tf):
    """Critical gain and frequency of a0 s^3 + a1 s^2 + a2 s + k*b for k*b in the constant term."""
    a0, a1, a2, a3 = tf.den.coeffs
    assert a3 == 0.0
    b = tf.num.coeffs[-1]
    return a1 * a2 / (a0 * b), math.sqrt(a2 / a0)


class TestCriticalGain:
    def test_motor_matches_routh(self, plant_tf, crit):
        k, w = routh_cubic(plant_tf)
        assert crit.k_cr == pytest.approx(k, rel=1e-6)
        assert crit.omega_cr == pytest.approx(w, rel=1e-6)
        assert crit.p_cr == pytest.approx(2 * math.pi / w, rel=1e-6)

    def test_printed_plant(self):
        cp = critical_gain(TransferFunction([1.2], PRINTED_DEN))
        assert cp.k_cr == pytest.approx(84.06, abs=0.01)
        assert cp.omega_cr == pytest.approx(43.26, abs=0.01)
        assert cp.p_cr == pytest.approx(0.14524, abs=1e-4)

    def test_textbook_cubic(self):
        cp = critical_gain(TransferFunction([1], [1, 3, 2, 0]))
        assert cp.k_cr == pytest.approx(6.0, rel=1e-7)
        assert cp.omega_cr == pytest.approx(math.sqrt(2), rel=1e-7)

    def test_first_order_has_none(self):
        with pytest.raises(NoCriticalGain):
            critical_gain(TransferFunction([1], [1, 1]))

    def test_rejects_biproper(self):
        with pytest.raises(ImproperSystem):
            critical_gain(TransferFunction([1, 1], [1, 2]))

    def test_boundary_properties(self, plant_tf, crit):
        at = poly_roots(plant_tf.den + plant_tf.num * crit.k_cr)
        top = max(at, key=lambda r: r.real)
        assert abs(top.real) <= 1e-8 * crit.omega_cr
        assert abs(abs(top.imag) - crit.omega_cr) <= 1e-8 * crit.omega_cr
        below = poly_roots(plant_tf.den + plant_tf.num * crit.k_cr * (1 - 1e-3))
        assert all(r.real < 0 for r in below)

    @given(
        st.builds(
            MotorParams,
            R=st.floats(0.5, 5),
            L=st.floats(5e-3, 0.2),
            K=st.floats(0.1, 3),
            J=st.floats(5e-3, 0.2),
            b=st.floats(1e-4, 0.05),
        )
    )
    def test_routh_oracle_random_motors(self, p):
        g = motor_to_tf(p)
        k, w = routh_cubic(g)
        cp = critical_gain(g)
        assert cp.k_cr == pytest.approx(k, rel=1e-6)
        assert cp.omega_cr == pytest.approx(w, rel=1e-6)

    def test_sustained_oscillation_period(self, plant_tf, crit):
        # marginal loop built directly: the design layer refuses non-Hurwitz loops
        cl_tf = unity_feedback(TransferFunction([crit.k_cr], [1]), plant_tf)
        tr = step_response(ClosedLoop(tf_to_ss(cl_tf), "P"), SimConfig(dt=1e-4, t_final=2.0))
        mask = tr.t >= 0.5
        t, y = tr.t[mask], tr.y[mask]
        peaks = [k for k in range(1, len(y) - 1) if y[k] > y[k - 1] and y[k] >= y[k + 1]]
        period = np.mean(np.diff(t[peaks]))
        assert period == pytest.approx(crit.p_cr, rel=0.02)


class TestZnGains:
    cp = CriticalPoint(k_cr=84.06, omega_cr=2 * math.pi / 0.14524)

    def test_p(self):
        g = zn_gains(self.cp, "P")
        assert g.kp == pytest.approx(42.03)
        assert g.ti is None and not g.has_integral and g.td == 0

    def test_pi(self):
        g = zn_gains(self.cp, "PI")
        assert g.kp == pytest.approx(37.827)
        assert g.ti == pytest.approx(0.12103, abs=1e-5)
        assert g.td == 0

    def test_pid(self):
        g = zn_gains(self.cp, "PID")
        assert g.kp == pytest.approx(50.436)
        assert g.ti == pytest.approx(0.07262, abs=1e-5)
        assert g.td == pytest.approx(0.018155, abs=1e-6)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            zn_gains(self.cp, "PD")

    @given(st.floats(0.1, 1e3), st.floats(0.1, 1e3), st.floats(0.1, 10), st.floats(0.1, 10))
    def test_homogeneity(self, k, w, a, b):
        base = CriticalPoint(k, w)
        scaled = CriticalPoint(a * k, w / b)  # period scales by b
        for kind in ("P", "PI", "PID"):
            g0, g1 = zn_gains(base, kind), zn_gains(scaled, kind)
            assert g1.kp == pytest.approx(a * g0.kp, rel=1e-12)
            assert g1.td == pytest.approx(b * g0.td, rel=1e-12)
            if g0.ti is not None:
                assert g1.ti == pytest.approx(b * g0.ti, rel=1e-12)


class TestPidGains:
    def test_validation(self):
        with pytest.raises(ValueError):
            PidGains(kp=0)
        with pytest.raises(ValueError):
            PidGains(kp=1, ti=-1)
        with pytest.raises(ValueError):
            PidGains(kp=1, td=-1)
