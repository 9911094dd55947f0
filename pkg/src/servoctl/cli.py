"""``servoctl`` command line.

Exit codes: 0 ok, 2 configuration error, 3 design failure, 4 numerical
failure.  Failures also print one JSON object to stderr, e.g.
``{"error": "UnstableDesign", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from servoctl.config import STATE_FEEDBACK, ControllerSpec, RunConfig, default_config_dict, load_config
from servoctl.design import equilibrium_output
from servoctl.errors import ConfigError, ServoctlError
from servoctl.report import format_table, render_svg, write_csv
from servoctl.runner import LoopFactory, run_all, simulate_spec
from servoctl.tuning import zn_gains


def _fmt_complex(z: complex) -> str:
    re_, im = z.real + 0.0, z.imag + 0.0
    if abs(im) <= 1e-12 * max(1.0, abs(z)):
        return f"{re_:.4g}" if abs(re_) > 1e-12 else "0"
    sign = "+" if im > 0 else "-"
    return f"{re_:.4g} {sign} {abs(im):.4g}i"


def _fmt_row(values) -> str:
    return "[" + ", ".join(f"{v + 0.0:.4g}" for v in values) + "]"


def _fmt_matrix(m, indent="    ") -> str:
    return "\n".join(indent + "  ".join(f"{v + 0.0:>12.6g}" for v in row) for row in np.asarray(m))


def cmd_model(cfg: RunConfig) -> int:
    plant = cfg.plant()
    tf, ss = plant.tf, plant.ss
    print("Transfer function (output/input):")
    print(f"  num: {_fmt_row(tf.num.coeffs)}")
    print(f"  den: {_fmt_row(tf.den.coeffs)}")
    states = "[angle, speed, current]" if plant.motor is not None else f"{ss.order} states"
    print(f"State space, x = {states}:")
    for name in "ABCD":
        print(f"  {name} =")
        print(_fmt_matrix(getattr(ss, name)))
    print("Open-loop poles:")
    for p in sorted(tf.poles(), key=lambda z: (-z.real, z.imag)):
        print(f"  {_fmt_complex(p)}")
    return 0


def cmd_tune(cfg: RunConfig) -> int:
    factory = LoopFactory(cfg.plant())
    cp = factory.critical_point
    print(f"Critical gain     K_cr     = {cp.k_cr:.6g}")
    print(f"Crossing freq     omega_cr = {cp.omega_cr:.6g} rad/s")
    print(f"Oscillation period P_cr    = {cp.p_cr:.6g} s")
    print()
    print(f"{'Controller':<12}{'Kp':>12}{'Ti (s)':>12}{'Td (s)':>12}")
    for kind in ("P", "PI", "PID"):
        g = zn_gains(cp, kind)
        ti = "inf" if g.ti is None else f"{g.ti:.6g}"
        print(f"{kind:<12}{g.kp:>12.6g}{ti:>12}{g.td:>12.6g}")
    return 0


def _design_specs(cfg: RunConfig) -> list[ControllerSpec]:
    specs = [c for c in cfg.controllers if c.kind in STATE_FEEDBACK]
    if not specs:
        raise ConfigError("design: configuration has no SFC/SFCIA controllers")
    return specs


def cmd_design(cfg: RunConfig) -> int:
    factory = LoopFactory(cfg.plant())
    for spec in _design_specs(cfg):
        cl = factory.build(spec)
        g = cl.gains
        print(f"[{spec.label}] {spec.kind}")
        if spec.poles is not None:
            print("  requested poles: " + ", ".join(_fmt_complex(p) for p in spec.poles))
        if spec.kind == "SFC":
            print(f"  K_c = {_fmt_row(g.kc)}   (u = r - K_c x)")
        else:
            k_a = list(g.kc) + [-g.ki]
            print(f"  K_a = {_fmt_row(k_a)}   (u = -K_a [x; w], w' = r - y)")
            print(f"  K_c = {_fmt_row(g.kc)}, integral gain k_w = {g.ki:.6g}")
        print("  closed-loop eigenvalues: " + ", ".join(_fmt_complex(p) for p in cl.poles))
        y_ss = equilibrium_output(cl, 1.0)
        print(f"  unit-step steady-state output = {y_ss:.6g}, analytic SSE = {abs(1.0 - y_ss):.4f}")
    return 0


def _simulate(cfg: RunConfig):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_all(cfg)
    paths = []
    for res in results:
        path = out / f"{res.loop.label}.csv"
        write_csv(res.trajectory, path)
        paths.append(path)
    return results, paths


def cmd_simulate(cfg: RunConfig) -> int:
    _, paths = _simulate(cfg)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    results, paths = _simulate(cfg)
    out = Path(cfg.out_dir)
    labels = [r.loop.label for r in results]
    table = format_table(labels, [r.metrics for r in results])
    (out / "report.txt").write_text(table, encoding="utf-8", newline="\n")
    metrics = {r.loop.label: {"kind": r.loop.kind, **r.metrics.as_dict()} for r in results}
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    written = paths + [out / "report.txt", out / "metrics.json"]
    if cfg.svg:
        svg = render_svg([r.trajectory for r in results], title="Position step response")
        (out / "comparison.svg").write_text(svg, encoding="utf-8", newline="\n")
        written.append(out / "comparison.svg")
    print(table, end="")
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_init(_args) -> int:
    print(json.dumps(default_config_dict(), indent=2))
    return 0


COMMANDS = {
    "model": cmd_model,
    "tune": cmd_tune,
    "design": cmd_design,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults: built-in motor and controllers)")
    common.add_argument("--out", metavar="DIR", help="output directory for CSV/report/SVG")
    common.add_argument("--dt", type=float, help="simulation step in seconds (default 1e-4)")
    common.add_argument("--t-final", type=float, dest="t_final", help="simulation horizon in seconds (default 2.0)")
    common.add_argument("--svg", action="store_true", default=None, help="also write comparison.svg (compare)")

    parser = argparse.ArgumentParser(
        prog="servoctl",
        description="DC servo position control: model, tune, design, simulate and compare controllers.",
        epilog="Run 'servoctl init > config.json' for a template with every default filled in.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "model": "print transfer function, state matrices and open-loop poles",
        "tune": "critical gain/period and Ziegler-Nichols P/PI/PID gains",
        "design": "state-feedback gains for the SFC/SFCIA controllers",
        "simulate": "write one step-response CSV per controller",
        "compare": "simulate all controllers and write a metric report",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    sub.add_parser("init", help="print the default configuration template")
    return parser


def _fail(exc: Exception, category: str, code: int) -> int:
    print(json.dumps({"error": category, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "init":
        return cmd_init(args)
    try:
        cfg = load_config(args.config).with_overrides(out_dir=args.out, dt=args.dt, t_final=args.t_final, svg=args.svg)
        return COMMANDS[args.command](cfg)
    except ServoctlError as exc:
        return _fail(exc, exc.category, exc.exit_code)
    except ValueError as exc:
        return _fail(exc, "ConfigError", ConfigError.exit_code)


if __name__ == "__main__":
    sys.exit(main())
