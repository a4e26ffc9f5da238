"""Synchronous DSA step loop, metrics and trajectory output."""
from __future__ import annotations

import csv
import logging
import time as _time
from dataclasses import asdict, dataclass, field
from math import sqrt

import numpy as np
import yaml

from . import kernels
from .baseline import OPTIMAL, build_objective, solve_bc
from .cbf import DOMAIN_EPS, admissible_set
from .controllers import reynolds_action, waypoint_action
from .decision import DmState, Mode, dm_step, fsc, rsc
from .dynamics import CorruptStateError, MasState, clip_norm, clip_rows
from .scenario import ReynoldsConfig, Scenario

log = logging.getLogger(__name__)

TRAJECTORY_HEADER = ("step", "time", "agent_id", "px", "py", "vx", "vy", "ax", "ay", "mode")


def fmt(x: float) -> str:
    return format(float(x), ".9g")


@dataclass
class StepRecord:
    step: int
    time: float
    positions: np.ndarray
    velocities: np.ndarray
    actions: np.ndarray
    modes: tuple
    min_distance: float
    min_h: float
    n_bc: int
    min_neighbor_distance: np.ndarray = field(repr=False, default=None)


@dataclass
class RunSummary:
    scenario: str
    n: int
    steps: int
    eta: float
    seed: int
    dsa_enabled: bool
    min_distance: float = float("inf")
    min_h: float = float("inf")
    violation_count: int = 0
    bc_steps: list = field(default_factory=list)
    bc_fraction: list = field(default_factory=list)
    mean_bc_fraction: float = 0.0
    switch_counts: list = field(default_factory=list)
    total_switches: int = 0
    lp_fallbacks: int = 0
    waypoints_completed: list | None = None
    all_plans_completed: bool | None = None
    aborted: bool = False
    abort_reason: str | None = None
    backend: str = kernels.BACKEND
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("min_distance", "min_h"):
            if out[key] == float("inf"):
                out[key] = ".inf"
        return out


class SimulationAbort(RuntimeError):
    def __init__(self, message, summary: RunSummary, step: int):
        super().__init__(message)
        self.summary = summary
        self.step = step


def mean_bc_fraction(summary: RunSummary) -> float:
    if not summary.bc_fraction:
        return 0.0
    return float(sum(summary.bc_fraction) / len(summary.bc_fraction))


def _distance_matrix(pos: np.ndarray) -> np.ndarray:
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def _metrics(state: MasState, dist: np.ndarray, radius: float, cbf):
    """Global min distance, min h over neighboring pairs, per-agent nearest-neighbor distance."""
    n = state.n
    if n < 2:
        return float("inf"), float("inf"), np.full(n, np.inf)
    masked = dist + np.diag(np.full(n, np.inf))
    nearest = masked.min(axis=1)
    min_h = float("inf")
    p, v = state.positions, state.velocities
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < radius and dist[i, j] > 0.0:
                h, _, _ = kernels.pair_h(
                    p[i, 0] - p[j, 0], p[i, 1] - p[j, 1], v[i, 0] - v[j, 0], v[i, 1] - v[j, 1],
                    cbf.a_max, cbf.d_min)
                if h < min_h:
                    min_h = h
    return float(nearest.min()), min_h, nearest


def _integrate(state: MasState, actions: np.ndarray, limits) -> MasState:
    """Zero-order-hold double integrator for all agents at once (same arithmetic as step_dynamics)."""
    eta = limits.eta
    p, v = state.positions, state.velocities
    new_p = p + v * eta + 0.5 * actions * eta * eta
    new_v = clip_rows(v + actions * eta, limits.v_max)
    if not (np.all(np.isfinite(new_p)) and np.all(np.isfinite(new_v))):
        raise CorruptStateError(f"non-finite state after step {state.step_index + 1}")
    return MasState(new_p, new_v, (state.step_index + 1) * eta, state.step_index + 1)


class Simulation:
    """Step-by-step DSA execution; ``run`` drives it to completion."""

    def __init__(self, scenario: Scenario, initial: MasState | None = None):
        self.scenario = scenario
        self.limits = scenario.limits
        self.cbf = scenario.cbf
        self.params = scenario.switch_params
        self.state = initial if initial is not None else scenario.initial_state()
        if self.state.n != scenario.n:
            raise ValueError("initial state size does not match scenario n")
        n = scenario.n
        self.dm = [DmState() for _ in range(n)]
        self.is_waypoint = not isinstance(scenario.controller, ReynoldsConfig)
        self.plans = scenario.controller.initial_plans() if self.is_waypoint else None
        self.lp_fallbacks = 0

    def _ac_action(self, i, me, nbr_states):
        ctl = self.scenario.controller
        if not self.is_waypoint:
            return reynolds_action(me, nbr_states, ctl.weights, self.limits)
        action, self.plans[i] = waypoint_action(me, self.plans[i], self.limits, ctl.k_p, ctl.k_d)
        return action

    def _bc_action(self, me, nbr_states):
        far = [s for s in nbr_states if _sep(me, s) > self.cbf.d_min + DOMAIN_EPS]
        objective = build_objective(self.cbf, me, far)
        sol = solve_bc(objective, admissible_set(self.cbf, me, nbr_states, self.limits))
        if sol.status != OPTIMAL:
            self.lp_fallbacks += 1
        return sol.action

    def step(self):
        """Advance one period.  Every agent reads only the pre-step snapshot."""
        snap = self.state
        k = snap.step_index + 1
        dist = _distance_matrix(snap.positions)
        r = self.limits.sense_radius
        n = snap.n
        actions = np.zeros((n, 2))
        new_dm = list(self.dm)
        for i in range(n):
            row = dist[i] < r
            row[i] = False
            nbr = np.flatnonzero(row)
            me = snap.agents[i]
            nbr_states = [snap.agents[j] for j in nbr]
            if self.scenario.dsa_enabled:
                dm = self.dm[i]
                if dm.mode == Mode.AC:
                    f = fsc(self.cbf, me, nbr_states, self.limits, self.params)
                    new_dm[i] = dm_step(dm, f, False, k)
                else:
                    rv = rsc(self.cbf, me, nbr_states, self.limits, self.params)
                    new_dm[i] = dm_step(dm, False, rv, k)
            if new_dm[i].mode == Mode.AC:
                # the waypoint AC runs in BC mode too so plans keep advancing
                actions[i] = clip_norm(self._ac_action(i, me, nbr_states), self.limits.a_max)
            else:
                if self.is_waypoint:
                    self._ac_action(i, me, nbr_states)
                actions[i] = self._bc_action(me, nbr_states)
        self.dm = new_dm
        self.state = _integrate(snap, actions, self.limits)
        return actions


def _sep(a, b) -> float:
    dx = a.position[0] - b.position[0]
    dy = a.position[1] - b.position[1]
    return sqrt(dx * dx + dy * dy)


def _record(sim: Simulation, actions, modes) -> StepRecord:
    st = sim.state
    dist = _distance_matrix(st.positions)
    dmin, hmin, nearest = _metrics(st, dist, sim.limits.sense_radius, sim.cbf)
    return StepRecord(
        st.step_index, st.time, st.positions, st.velocities, actions, modes,
        dmin, hmin, sum(1 for m in modes if m == Mode.BC), nearest,
    )


def run(scenario: Scenario, initial: MasState | None = None, sinks=()) -> RunSummary:
    """Execute floor(duration / eta) steps; each StepRecord is passed to every sink."""
    t0 = _time.perf_counter()
    sim = Simulation(scenario, initial)
    n = scenario.n
    total = scenario.steps
    summary = RunSummary(scenario.name, n, total, scenario.limits.eta, scenario.seed, scenario.dsa_enabled)
    bc_steps = [0] * n
    switches = [0] * n
    d_min = scenario.limits.d_min

    def emit(rec):
        summary.min_distance = min(summary.min_distance, rec.min_distance)
        summary.min_h = min(summary.min_h, rec.min_h)
        if rec.min_distance < d_min:
            summary.violation_count += 1
        for sink in sinks:
            sink(rec)

    emit(_record(sim, np.zeros((n, 2)), tuple(Mode.AC for _ in range(n))))
    try:
        for _ in range(total):
            before = [dm.mode for dm in sim.dm]
            actions = sim.step()
            modes = tuple(dm.mode for dm in sim.dm)
            for i in range(n):
                if modes[i] != before[i]:
                    switches[i] += 1
                if modes[i] == Mode.BC:
                    bc_steps[i] += 1
            emit(_record(sim, actions, modes))
    except CorruptStateError as exc:
        summary.aborted = True
        summary.abort_reason = str(exc)
        _finish(summary, sim, bc_steps, switches, t0)
        raise SimulationAbort(str(exc), summary, sim.state.step_index) from exc
    _finish(summary, sim, bc_steps, switches, t0)
    return summary


def _finish(summary, sim, bc_steps, switches, t0):
    steps = max(sim.state.step_index, 1)
    summary.bc_steps = bc_steps
    summary.bc_fraction = [b / steps for b in bc_steps]
    summary.mean_bc_fraction = mean_bc_fraction(summary)
    summary.switch_counts = switches
    summary.total_switches = sum(switches)
    summary.lp_fallbacks = sim.lp_fallbacks
    if sim.plans is not None:
        summary.waypoints_completed = [p.current_index for p in sim.plans]
        summary.all_plans_completed = all(p.done for p in sim.plans)
    summary.wall_time = _time.perf_counter() - t0


# -- output -----------------------------------------------------------------

class TrajectoryWriter:
    """CSV sink: one row per (step, agent)."""

    def __init__(self, fh):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(TRAJECTORY_HEADER)

    def __call__(self, rec: StepRecord):
        for i in range(len(rec.positions)):
            p, v, a = rec.positions[i], rec.velocities[i], rec.actions[i]
            self._w.writerow((
                rec.step, fmt(rec.time), i, fmt(p[0]), fmt(p[1]), fmt(v[0]), fmt(v[1]),
                fmt(a[0]), fmt(a[1]), int(rec.modes[i]),
            ))


class SeriesWriter:
    """CSV sink for plot-ready series: nearest-neighbor distance per agent."""

    def __init__(self, fh, n: int):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(["step", "time", "min_distance", "min_h", "n_bc"]
                         + [f"nearest_{i}" for i in range(n)])

    def __call__(self, rec: StepRecord):
        self._w.writerow([rec.step, fmt(rec.time), fmt(rec.min_distance), fmt(rec.min_h), rec.n_bc]
                         + [fmt(x) for x in rec.min_neighbor_distance])


def write_summary(summary: RunSummary, fh) -> None:
    yaml.safe_dump(summary.to_dict(), fh, sort_keys=False)
