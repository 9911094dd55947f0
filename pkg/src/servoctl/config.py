"""Strict JSON run configuration.

Every field is optional.  Omitted fields fall back to the default motor,
the five standard controllers and the default simulation settings.

Example::

    {
      "motor": {"R": 2.45, "L": 0.035, "K": 1.2, "J": 0.022, "b": 0.0005},
      "controllers": [
        {"kind": "PID", "tuning": "zn"},
        {"kind": "PI", "kp": 30.0, "ti": 0.2},
        {"kind": "SFC", "label": "SFC_k10", "gains": [10, 0, 0.9]},
        {"kind": "SFCIA", "poles": [-30, [-35, 5], [-35, -5], -40]}
      ],
      "sim": {"dt": 1e-4, "t_final": 2.0, "step_amplitude": 1.0},
      "output": {"dir": "out", "svg": true}
    }

Poles are given as a real number or a ``[re, im]`` pair.  A ``plant`` entry
with either ``num``/``den`` or ``A``/``B``/``C``/``D`` replaces the motor
model.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from servoctl.design import DEFAULT_SFC_POLES, DEFAULT_SFCIA_POLES
from servoctl.errors import ConfigError, ServoctlError
from servoctl.lti import DEFAULT_MOTOR, MotorParams, StateSpace, TransferFunction, motor_to_ss, motor_to_tf, ss_to_tf, tf_to_ss
from servoctl.simulate import SimConfig

CLASSICAL = ("P", "PI", "PID")
STATE_FEEDBACK = ("SFC", "SFCIA")
KINDS = CLASSICAL + STATE_FEEDBACK
_LABEL_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class ControllerSpec:
    kind: str
    label: str
    kp: Optional[float] = None
    ti: Optional[float] = None
    td: Optional[float] = None
    poles: Optional[tuple] = None
    gains: Optional[tuple] = None

    @property
    def auto(self) -> bool:
        """True when gains come from tuning (ZN) or pole placement."""
        if self.kind in CLASSICAL:
            return self.kp is None
        return self.gains is None


@dataclass(frozen=True)
class Plant:
    tf: TransferFunction
    ss: StateSpace
    motor: Optional[MotorParams] = None


@dataclass(frozen=True)
class RunConfig:
    motor: MotorParams = DEFAULT_MOTOR
    controllers: tuple = ()
    sim: SimConfig = SimConfig()
    out_dir: str = "out"
    svg: bool = False
    plant_override: Optional[Plant] = None

    def plant(self) -> Plant:
        if self.plant_override is not None:
            return self.plant_override
        return Plant(tf=motor_to_tf(self.motor), ss=motor_to_ss(self.motor), motor=self.motor)

    def with_overrides(self, *, out_dir=None, dt=None, t_final=None, svg=None) -> RunConfig:
        sim = self.sim
        try:
            if dt is not None or t_final is not None:
                sim = SimConfig(
                    dt=self.sim.dt if dt is None else dt,
                    t_final=self.sim.t_final if t_final is None else t_final,
                    step_amplitude=self.sim.step_amplitude,
                )
        except ValueError as exc:
            raise ConfigError(f"sim: {exc}") from None
        return replace(
            self,
            sim=sim,
            out_dir=self.out_dir if out_dir is None else out_dir,
            svg=self.svg if svg is None else svg,
        )


def default_controllers() -> tuple:
    return tuple(_parse_controller({"kind": k}, i) for i, k in enumerate(KINDS))


def _pole_json(p: complex):
    return float(p.real) if p.imag == 0 else [float(p.real), float(p.imag)]


def default_config_dict() -> dict:
    """The template written by ``servoctl init``."""
    sim = SimConfig()
    return {
        "motor": asdict(DEFAULT_MOTOR),
        "controllers": [
            {"kind": "P", "tuning": "zn"},
            {"kind": "PI", "tuning": "zn"},
            {"kind": "PID", "tuning": "zn"},
            {"kind": "SFC", "poles": [_pole_json(complex(p)) for p in DEFAULT_SFC_POLES]},
            {"kind": "SFCIA", "poles": [_pole_json(complex(p)) for p in DEFAULT_SFCIA_POLES]},
        ],
        "sim": asdict(sim),
        "output": {"dir": "out", "svg": False},
    }


def _strict_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed {sorted(allowed)}")


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _number_list(v, where) -> list:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty list of numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]


def _matrix(v, where):
    if not isinstance(v, list) or not all(isinstance(row, list) for row in v):
        raise ConfigError(f"{where}: expected a list of rows")
    return [[_number(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(v)]


def _poles(v, where) -> tuple:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}: expected a non-empty list of poles")
    out = []
    for i, p in enumerate(v):
        if isinstance(p, list):
            if len(p) != 2:
                raise ConfigError(f"{where}[{i}]: complex poles are [re, im] pairs")
            out.append(complex(_number(p[0], f"{where}[{i}][0]"), _number(p[1], f"{where}[{i}][1]")))
        else:
            out.append(complex(_number(p, f"{where}[{i}]"), 0.0))
    return tuple(out)


def _parse_motor(obj) -> MotorParams:
    _strict_keys(obj, ("R", "L", "K", "J", "b"), "motor")
    vals = {k: _number(v, f"motor.{k}") for k, v in obj.items()}
    return MotorParams(**{**asdict(DEFAULT_MOTOR), **vals})


def _parse_plant(obj) -> Plant:
    where = "plant"
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    try:
        if set(obj) & {"num", "den"}:
            _strict_keys(obj, ("num", "den"), where)
            if "num" not in obj or "den" not in obj:
                raise ConfigError(f"{where}: need both num and den")
            tf = TransferFunction(_number_list(obj["num"], "plant.num"), _number_list(obj["den"], "plant.den"))
            return Plant(tf=tf, ss=tf_to_ss(tf))
        _strict_keys(obj, ("A", "B", "C", "D"), where)
        missing = [k for k in "ABC" if k not in obj]
        if missing:
            raise ConfigError(f"{where}: missing {missing}")
        D = _matrix(obj["D"], "plant.D") if "D" in obj else [[0.0]]
        ss = StateSpace(_matrix(obj["A"], "plant.A"), _matrix(obj["B"], "plant.B"), _matrix(obj["C"], "plant.C"), D)
        return Plant(tf=ss_to_tf(ss), ss=ss)
    except ConfigError:
        raise
    except (ServoctlError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_controller(obj, i) -> ControllerSpec:
    where = f"controllers[{i}]"
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where}: expected an object with a 'kind'")
    kind = obj["kind"]
    if kind not in KINDS:
        raise ConfigError(f"{where}.kind: {kind!r} not one of {list(KINDS)}")
    label = obj.get("label", kind)
    if not isinstance(label, str) or not _LABEL_RE.match(label):
        raise ConfigError(f"{where}.label: must match {_LABEL_RE.pattern}")

    if kind in CLASSICAL:
        needed = {"P": ("kp",), "PI": ("kp", "ti"), "PID": ("kp", "ti", "td")}[kind]
        _strict_keys(obj, ("kind", "label", "tuning") + needed, where)
        explicit = [k for k in needed if k in obj]
        if "tuning" in obj:
            if obj["tuning"] != "zn":
                raise ConfigError(f"{where}.tuning: only 'zn' is supported")
            if explicit:
                raise ConfigError(f"{where}: 'tuning' and explicit gains {explicit} are mutually exclusive")
        if explicit and len(explicit) != len(needed):
            raise ConfigError(f"{where}: explicit {kind} gains need all of {list(needed)}")
        vals = {k: _number(obj[k], f"{where}.{k}") for k in explicit}
        for k, v in vals.items():
            if v <= 0:
                raise ConfigError(f"{where}.{k}: must be positive")
        return ControllerSpec(kind=kind, label=label, **vals)

    allowed = ("kind", "label", "tuning", "poles") + (("gains",) if kind == "SFC" else ())
    _strict_keys(obj, allowed, where)
    if "tuning" in obj and obj["tuning"] != "place":
        raise ConfigError(f"{where}.tuning: only 'place' is supported")
    if "gains" in obj and ("poles" in obj or "tuning" in obj):
        raise ConfigError(f"{where}: explicit 'gains' exclude 'poles'/'tuning'")
    if "gains" in obj:
        return ControllerSpec(kind=kind, label=label, gains=tuple(_number_list(obj["gains"], f"{where}.gains")))
    default = DEFAULT_SFC_POLES if kind == "SFC" else DEFAULT_SFCIA_POLES
    poles = _poles(obj["poles"], f"{where}.poles") if "poles" in obj else tuple(complex(p) for p in default)
    return ControllerSpec(kind=kind, label=label, poles=poles)


def parse_config(data: dict) -> RunConfig:
    _strict_keys(data, ("motor", "plant", "controllers", "sim", "output"), "config")
    if "motor" in data and "plant" in data:
        raise ConfigError("config: 'motor' and 'plant' are mutually exclusive")
    motor = _parse_motor(data["motor"]) if "motor" in data else DEFAULT_MOTOR
    plant = _parse_plant(data["plant"]) if "plant" in data else None

    if "controllers" in data:
        raw = data["controllers"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("controllers: expected a non-empty list")
        controllers = tuple(_parse_controller(c, i) for i, c in enumerate(raw))
    else:
        controllers = default_controllers()
    labels = [c.label for c in controllers]
    dupes = sorted({x for x in labels if labels.count(x) > 1})
    if dupes:
        raise ConfigError(f"controllers: duplicate label(s) {dupes}; set 'label' to disambiguate")

    sim_obj = data.get("sim", {})
    _strict_keys(sim_obj, ("dt", "t_final", "step_amplitude"), "sim")
    try:
        sim = SimConfig(**{k: _number(v, f"sim.{k}") for k, v in sim_obj.items()})
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from None

    out_obj = data.get("output", {})
    _strict_keys(out_obj, ("dir", "svg"), "output")
    out_dir = out_obj.get("dir", "out")
    svg = out_obj.get("svg", False)
    if not isinstance(out_dir, str) or not isinstance(svg, bool):
        raise ConfigError("output: 'dir' must be a string and 'svg' a boolean")

    return RunConfig(motor=motor, controllers=controllers, sim=sim, out_dir=out_dir, svg=svg, plant_override=plant)


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_config(data)
