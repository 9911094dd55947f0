"""Simulate the five reference controllers and set each metric beside its published value.

    python3 scripts/reproduce_comparison.py [--dt 1e-4] [--t-final 2.0]

The SFC column uses the k1 = 10 gain reconstruction [10, 0, 0.9].
"""

import argparse

from servoctl.config import load_config
from servoctl.metrics import full_report
from servoctl.runner import LoopFactory
from servoctl.simulate import SimConfig, step_response

PUBLISHED = {
    "P": dict(overshoot_pct=46.31, sse=0.00, settling_time=0.60, rise_time=0.04, peak_time=0.11),
    "PI": dict(overshoot_pct=85.41, sse=0.00, settling_time=1.11, rise_time=0.04, peak_time=0.12),
    "PID": dict(overshoot_pct=56.13, sse=0.00, settling_time=0.32, rise_time=0.03, peak_time=0.09),
    "SFC_k1_10": dict(overshoot_pct=2.39, sse=0.90, settling_time=0.33, rise_time=0.13, peak_time=0.29),
    "SFCIA": dict(overshoot_pct=0.00, sse=0.00, settling_time=0.26, rise_time=0.15, peak_time=0.34),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/sfc_k1_10.json")
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--t-final", type=float, default=2.0)
    args = ap.parse_args()

    cfg = load_config(args.config)
    sim = SimConfig(dt=args.dt, t_final=args.t_final)
    factory = LoopFactory(cfg.plant())
    print(f"{'controller':<11}{'metric':<15}{'ours':>10}{'published':>11}{'rel dev':>12}")
    for spec in cfg.controllers:
        rep = full_report(step_response(factory.build(spec), sim))
        for key, ref in PUBLISHED.get(spec.label, {}).items():
            got = getattr(rep, key)
            if got is None:
                print(f"{spec.label:<11}{key:<15}{'n/a':>10}{ref:>11.2f}")
                continue
            dev = f"{(got - ref) / ref:+.1%}" if ref else f"{got - ref:+.3f} abs"
            flag = " (horizon)" if key == "peak_time" and rep.monotone else ""
            print(f"{spec.label:<11}{key:<15}{got:>10.3f}{ref:>11.2f}{dev:>12}{flag}")


if __name__ == "__main__":
    main()
