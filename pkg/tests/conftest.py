import numpy as np
import pytest

from servoctl.design import (
    DEFAULT_SFC_POLES,
    DEFAULT_SFCIA_POLES,
    SFC_K1_10_GAINS,
    build_p_loop,
    build_pi_loop,
    build_pid_loop,
    build_sfc_loop,
    build_sfcia_loop,
    place_sfc_loop,
)
from servoctl.lti import DEFAULT_MOTOR, motor_to_ss, motor_to_tf
from servoctl.tuning import critical_gain, zn_gains

# Denominator exactly as printed for the reference motor (rounded coefficients).
PRINTED_DEN = [0.00077, 0.0539, 1.441, 0.0]


@pytest.fixture(scope="session")
def plant_tf():
    return motor_to_tf(DEFAULT_MOTOR)


@pytest.fixture(scope="session")
def plant_ss():
    return motor_to_ss(DEFAULT_MOTOR)


@pytest.fixture(scope="session")
def crit(plant_tf):
    return critical_gain(plant_tf)


@pytest.fixture(scope="session")
def reference_loops(plant_tf, plant_ss, crit):
    """The five default loops, with SFC in its k1 = 10 form."""
    return {
        "P": build_p_loop(plant_tf, zn_gains(crit, "P").kp),
        "PI": build_pi_loop(plant_tf, zn_gains(crit, "PI")),
        "PID": build_pid_loop(plant_tf, zn_gains(crit, "PID")),
        "SFC": build_sfc_loop(plant_ss, SFC_K1_10_GAINS),
        "SFCIA": build_sfcia_loop(plant_ss, DEFAULT_SFCIA_POLES),
    }


@pytest.fixture(scope="session")
def sfc_default(plant_ss):
    return place_sfc_loop(plant_ss, DEFAULT_SFC_POLES)


def random_pole_set(rng, n, re_range=(1.0, 80.0), im_range=(1.0, 60.0)):
    """Stable, conjugate-closed set of n poles."""
    out = []
    while len(out) < n:
        if n - len(out) >= 2 and rng.random() < 0.5:
            re, im = -rng.uniform(*re_range), rng.uniform(*im_range)
            out += [complex(re, im), complex(re, -im)]
        else:
            out.append(complex(-rng.uniform(*re_range), 0.0))
    return out


def as_sorted(z):
    return sorted(np.asarray(z, dtype=complex), key=lambda v: (round(v.real, 6), v.imag))
