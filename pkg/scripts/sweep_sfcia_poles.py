"""Settling time of the integral-augmented loop as its real pole set is moved left.

Poles are {-p, -1.1p, -1.2p, -1.3p}; the run prints overshoot, SSE and 2%
settling for each base p and marks those settling within --target seconds.
"""

import argparse

import numpy as np

from servoctl.design import build_sfcia_loop
from servoctl.lti import DEFAULT_MOTOR, motor_to_ss
from servoctl.metrics import full_report
from servoctl.simulate import SimConfig, step_response


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=float, nargs=3, default=(15.0, 45.0, 2.5), metavar=("START", "STOP", "STEP"))
    ap.add_argument("--target", type=float, default=0.35)
    ap.add_argument("--dt", type=float, default=1e-4)
    args = ap.parse_args()

    ss = motor_to_ss(DEFAULT_MOTOR)
    sim = SimConfig(dt=args.dt, t_final=2.0)
    start, stop, step = args.base
    print(f"{'base':>7}  {'poles':<28}{'OS %':>7}{'SSE':>10}{'Ts (s)':>9}")
    for p in np.arange(start, stop + 1e-9, step):
        poles = [-p * f for f in (1.0, 1.1, 1.2, 1.3)]
        rep = full_report(step_response(build_sfcia_loop(ss, poles), sim))
        mark = "  <" if rep.settling_time is not None and rep.settling_time < args.target else ""
        names = ", ".join(f"{q:g}" for q in poles)
        print(f"{p:>7.2f}  {names:<28}{rep.overshoot_pct:>7.3f}{rep.sse:>10.1e}{rep.settling_time:>9.3f}{mark}")


if __name__ == "__main__":
    main()
