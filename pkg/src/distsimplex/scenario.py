"""Scenario description, YAML loading, validation and initial-state sampling."""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from importlib import resources
from math import floor
from pathlib import Path

import numpy as np
import yaml

from . import kernels
from .cbf import PairwiseCbf
from .controllers import ReynoldsWeights, WaypointPlan
from .decision import SwitchParams
from .dynamics import MasState, PhysicalLimits

log = logging.getLogger(__name__)

BUILTIN = ("flocking", "flocking-nodsa", "waypoint")


class ScenarioError(ValueError):
    """The scenario file is malformed or violates an invariant."""


@dataclass(frozen=True)
class ReynoldsConfig:
    weights: ReynoldsWeights = field(default_factory=ReynoldsWeights)


@dataclass(frozen=True)
class WaypointConfig:
    plans: tuple = ()
    k_p: float = 2.0
    k_d: float = 1.5
    capture_radius: float = 0.1

    def initial_plans(self) -> list[WaypointPlan]:
        return [WaypointPlan(tuple(p), 0, self.capture_radius) for p in self.plans]


@dataclass(frozen=True)
class InitConfig:
    mode: str = "uniform"
    position_range: tuple = (-10.0, 10.0)
    velocity_range: tuple = (-1.0, 1.0)
    h_margin: float = 0.5
    max_attempts: int = 10_000
    positions: tuple = ()
    velocities: tuple = ()


@dataclass(frozen=True)
class OutputConfig:
    trajectory: str | None = "trajectory.csv"
    summary: str | None = "summary.yaml"
    series: str | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    limits: PhysicalLimits
    gamma: float = 1.0
    m: int = 3
    reach_check: bool = True
    rsc_reach: bool = True
    controller: ReynoldsConfig | WaypointConfig = field(default_factory=ReynoldsConfig)
    dsa_enabled: bool = True
    duration: float = 50.0
    seed: int = 0
    init: InitConfig = field(default_factory=InitConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def steps(self) -> int:
        return int(floor(self.duration / self.limits.eta + 1e-9))

    @property
    def cbf(self) -> PairwiseCbf:
        return PairwiseCbf(self.limits.a_max, self.limits.d_min, self.gamma)

    @property
    def switch_params(self) -> SwitchParams:
        return SwitchParams(self.m, self.limits.eta, self.reach_check, self.rsc_reach)

    def initial_state(self) -> MasState:
        if self.init.mode == "explicit":
            state = MasState(np.array(self.init.positions, float), np.array(self.init.velocities, float))
            if self.dsa_enabled:
                check_recoverable(state, self.limits, 0.0)
            return state
        return sample_recoverable(self)


def _pairwise_min_h(pos, vel, limits: PhysicalLimits):
    n = len(pos)
    min_h = float("inf")
    min_d = float("inf")
    for i in range(n):
        for j in range(i + 1, n):
            d = pos[i] - pos[j]
            dv = vel[i] - vel[j]
            h, dist, _ = kernels.pair_h(d[0], d[1], dv[0], dv[1], limits.a_max, limits.d_min)
            min_h = min(min_h, h)
            min_d = min(min_d, dist)
    return min_h, min_d


def check_recoverable(state: MasState, limits: PhysicalLimits, h_margin: float = 0.0) -> None:
    try:
        min_h, min_d = _pairwise_min_h(state.positions, state.velocities, limits)
    except ValueError as exc:
        raise ScenarioError(f"initial state invalid: {exc}") from None
    if min_d < limits.d_min:
        raise ScenarioError(f"initial state not recoverable: min pairwise distance {min_d:.6g} < d_min")
    if min_h < h_margin:
        raise ScenarioError(f"initial state not recoverable: min pairwise h {min_h:.6g} < {h_margin}")


def sample_recoverable(scn: Scenario) -> MasState:
    """Uniform positions/velocities, resampled until every pair has h >= h_margin.

    The same seed gives the same initial state whether or not DSA is enabled.
    """
    rng = np.random.default_rng(scn.seed)
    lo_p, hi_p = scn.init.position_range
    lo_v, hi_v = scn.init.velocity_range
    for attempt in range(scn.init.max_attempts):
        pos = rng.uniform(lo_p, hi_p, size=(scn.n, 2))
        vel = rng.uniform(lo_v, hi_v, size=(scn.n, 2))
        min_h, min_d = _pairwise_min_h(pos, vel, scn.limits)
        if min_h >= scn.init.h_margin and min_d >= scn.limits.d_min:
            log.debug("initial state accepted after %d attempts", attempt + 1)
            return MasState(pos, vel)
    raise ScenarioError(
        f"no recoverable initial state found in {scn.init.max_attempts} attempts"
    )


# -- loading ----------------------------------------------------------------

def apply_overrides(raw: dict, overrides) -> dict:
    """Apply dotted ``key=value`` overrides; values are parsed as YAML scalars."""
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ScenarioError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        node = raw
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ScenarioError(f"override {key!r} descends into a non-mapping")
        node[parts[-1]] = yaml.safe_load(value)
    return raw


def _section(raw, name):
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ScenarioError(f"'{name}' must be a mapping")
    return sec


def from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario document must be a mapping")
    known = {"name", "n", "duration", "seed", "dsa_enabled", "limits", "cbf", "controller", "init", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        lim = _section(raw, "limits")
        limits = PhysicalLimits(
            a_max=float(lim["a_max"]),
            v_max=float(lim["v_max"]),
            sense_radius=float(lim["sense_radius"]),
            d_min=float(lim["d_min"]),
            eta=float(lim["eta"]),
        )
        cbf = _section(raw, "cbf")
        ctl = _section(raw, "controller")
        kind = ctl.get("type", "reynolds")
        if kind == "reynolds":
            w = ctl.get("weights") or {}
            controller = ReynoldsConfig(ReynoldsWeights(
                float(w.get("w_s", 3.0)), float(w.get("w_c", 1.5)), float(w.get("w_al", 0.5))))
        elif kind == "waypoint":
            plans = tuple(tuple((float(x), float(y)) for x, y in p) for p in ctl.get("plans", ()))
            controller = WaypointConfig(
                plans,
                float(ctl.get("k_p", 2.0)),
                float(ctl.get("k_d", 1.5)),
                float(ctl.get("capture_radius", 0.1)),
            )
        else:
            raise ScenarioError(f"unknown controller type {kind!r} (expected reynolds or waypoint)")
        ini = _section(raw, "init")
        init = InitConfig(
            mode=ini.get("mode", "uniform"),
            position_range=tuple(float(x) for x in ini.get("position_range", (-10.0, 10.0))),
            velocity_range=tuple(float(x) for x in ini.get("velocity_range", (-1.0, 1.0))),
            h_margin=float(ini.get("h_margin", 0.5)),
            max_attempts=int(ini.get("max_attempts", 10_000)),
            positions=tuple(tuple(float(c) for c in p) for p in ini.get("positions", ())),
            velocities=tuple(tuple(float(c) for c in v) for v in ini.get("velocities", ())),
        )
        out = _section(raw, "output")
        output = OutputConfig(
            trajectory=out.get("trajectory", "trajectory.csv"),
            summary=out.get("summary", "summary.yaml"),
            series=out.get("series"),
        )
        scn = Scenario(
            name=str(raw.get("name", "scenario")),
            n=int(raw["n"]),
            limits=limits,
            gamma=float(cbf.get("gamma", 1.0)),
            m=int(cbf.get("m", 3)),
            reach_check=bool(cbf.get("reach_check", True)),
            rsc_reach=bool(cbf.get("rsc_reach", True)),
            controller=controller,
            dsa_enabled=bool(raw.get("dsa_enabled", True)),
            duration=float(raw["duration"]),
            seed=int(raw.get("seed", 0)),
            init=init,
            output=output,
        )
    except KeyError as exc:
        raise ScenarioError(f"missing required field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None
    validate(scn)
    return scn


def validate(scn: Scenario) -> None:
    if scn.n < 1:
        raise ScenarioError("n must be >= 1")
    if scn.gamma <= 0:
        raise ScenarioError("cbf.gamma must be > 0")
    try:
        SwitchParams(scn.m, scn.limits.eta)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    if scn.steps < 1:
        raise ScenarioError("duration must cover at least one control period")
    exact = scn.duration / scn.limits.eta
    if abs(exact - scn.steps) > 1e-9 * max(1.0, exact):
        log.warning("duration %g is not a multiple of eta; truncated to %d steps", scn.duration, scn.steps)
    if scn.init.mode not in ("uniform", "explicit"):
        raise ScenarioError(f"init.mode must be 'uniform' or 'explicit' (got {scn.init.mode!r})")
    if scn.init.mode == "explicit":
        if len(scn.init.positions) != scn.n or len(scn.init.velocities) != scn.n:
            raise ScenarioError("explicit init needs exactly n positions and n velocities")
        if scn.dsa_enabled:
            scn.initial_state()
    if isinstance(scn.controller, WaypointConfig) and len(scn.controller.plans) != scn.n:
        raise ScenarioError("waypoint controller needs one plan per agent")


def load(path, overrides=()) -> Scenario:
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    return from_dict(apply_overrides(raw, overrides))


def builtin_raw(name: str) -> dict:
    if name not in BUILTIN:
        raise ScenarioError(f"unknown demo {name!r}; valid names: {', '.join(BUILTIN)}")
    text = resources.files("distsimplex.scenarios").joinpath(f"{name}.yaml").read_text()
    return yaml.safe_load(text)


def builtin(name: str, seed: int | None = None, overrides=()) -> Scenario:
    raw = builtin_raw(name)
    if seed is not None:
        raw["seed"] = int(seed)
    return from_dict(apply_overrides(raw, overrides))
