"""Turn controller specs into closed loops, trajectories and metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from servoctl.config import ControllerSpec, Plant, RunConfig
from servoctl.design import (
    ClosedLoop,
    build_p_loop,
    build_pi_loop,
    build_pid_loop,
    build_sfc_loop,
    build_sfcia_loop,
    place_sfc_loop,
)
from servoctl.metrics import MetricsReport, full_report
from servoctl.simulate import SimConfig, Trajectory, step_response
from servoctl.tuning import CriticalPoint, PidGains, critical_gain, zn_gains


@dataclass
class RunResult:
    loop: ClosedLoop
    trajectory: Trajectory
    metrics: MetricsReport


class LoopFactory:
    """Builds loops for one plant, computing the critical point at most once."""

    def __init__(self, plant: Plant):
        self.plant = plant
        self._cp: Optional[CriticalPoint] = None

    @property
    def critical_point(self) -> CriticalPoint:
        if self._cp is None:
            self._cp = critical_gain(self.plant.tf)
        return self._cp

    def gains_for(self, spec: ControllerSpec) -> PidGains:
        if spec.auto:
            return zn_gains(self.critical_point, spec.kind)
        return PidGains(kp=spec.kp, ti=spec.ti, td=spec.td or 0.0)

    def build(self, spec: ControllerSpec) -> ClosedLoop:
        tf, ss = self.plant.tf, self.plant.ss
        if spec.kind == "P":
            return build_p_loop(tf, self.gains_for(spec).kp, spec.label)
        if spec.kind == "PI":
            return build_pi_loop(tf, self.gains_for(spec), spec.label)
        if spec.kind == "PID":
            return build_pid_loop(tf, self.gains_for(spec), spec.label)
        if spec.kind == "SFC":
            if spec.gains is not None:
                return build_sfc_loop(ss, spec.gains, spec.label)
            return place_sfc_loop(ss, spec.poles, spec.label)
        if spec.kind == "SFCIA":
            return build_sfcia_loop(ss, spec.poles, spec.label)
        raise ValueError(f"unknown controller kind {spec.kind!r}")


def simulate_spec(factory: LoopFactory, spec: ControllerSpec, sim: SimConfig) -> RunResult:
    loop = factory.build(spec)
    tr = step_response(loop, sim)
    return RunResult(loop=loop, trajectory=tr, metrics=full_report(tr))


def run_all(cfg: RunConfig) -> list[RunResult]:
    factory = LoopFactory(cfg.plant())
    return [simulate_spec(factory, spec, cfg.sim) for spec in cfg.controllers]
