"""Per-agent switching logic between the advanced and baseline controllers."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from . import kernels
from .cbf import DOMAIN_EPS, PairwiseCbf, _rel, lie_decomposition
from .dynamics import AgentState, PhysicalLimits


class Mode(enum.IntEnum):
    AC = 0
    BC = 1


@dataclass(frozen=True)
class DmState:
    mode: Mode = Mode.AC
    last_switch_step: int = 0


@dataclass(frozen=True)
class SwitchParams:
    """m: reverse-switching multiplier (m >= 2).

    reach_check adds a closed-form worst-case successor bound to both
    conditions; with it off the conditions are the bare threshold tests
    h < lambda and h > m * lambda.
    """

    m: int = 3
    eta: float = 0.1
    reach_check: bool = True
    rsc_reach: bool = True

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"SwitchParams.m must be an integer >= 2 (got {self.m!r})")
        if not self.eta > 0:
            raise ValueError(f"SwitchParams.eta must be > 0 (got {self.eta!r})")


def threshold_lambda(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState, limits: PhysicalLimits) -> float:
    """eta times the magnitude of the worst-case (negative) Lie derivative, clamped at 0.

    For unit control coefficients the worst case over the a_max disks is
    drift - 2 a_max.
    """
    lie = lie_decomposition(cbf, s_i, s_j)
    ci = float(lie.coeff_i[0] ** 2 + lie.coeff_i[1] ** 2) ** 0.5
    cj = float(lie.coeff_j[0] ** 2 + lie.coeff_j[1] ** 2) ** 0.5
    worst = lie.drift - (ci + cj) * limits.a_max
    return limits.eta * max(0.0, -worst)


def _pair_terms(cbf, s_i, s_j):
    dpx, dpy, dvx, dvy = _rel(s_i, s_j)
    h, dist, approach = kernels.pair_h(dpx, dpy, dvx, dvy, cbf.a_max, cbf.d_min)
    return h, dist, approach


def reach_bound(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState, limits: PhysicalLimits, horizon: float) -> float:
    """Guaranteed lower bound on h_ij after ``horizon`` seconds of bounded actions."""
    _, dist, approach = _pair_terms(cbf, s_i, s_j)
    return kernels.reach_lower_bound(
        dist, approach, s_i.speed, s_j.speed, limits.a_max, limits.v_max, cbf.d_min, horizon
    )


def fsc(cbf: PairwiseCbf, self_state: AgentState, neighbor_states, limits: PhysicalLimits,
        params: SwitchParams) -> bool:
    for s_j in neighbor_states:
        h, dist, _ = _pair_terms(cbf, self_state, s_j)
        if dist <= cbf.d_min + DOMAIN_EPS:
            return True
        if h < threshold_lambda(cbf, self_state, s_j, limits):
            return True
        if params.reach_check and reach_bound(cbf, self_state, s_j, limits, params.eta) < 0.0:
            return True
    return False


def rsc(cbf: PairwiseCbf, self_state: AgentState, neighbor_states, limits: PhysicalLimits,
        params: SwitchParams) -> bool:
    for s_j in neighbor_states:
        h, dist, _ = _pair_terms(cbf, self_state, s_j)
        if dist <= cbf.d_min + DOMAIN_EPS:
            return False
        if not h > params.m * threshold_lambda(cbf, self_state, s_j, limits):
            return False
        if params.reach_check and params.rsc_reach and not reach_bound(cbf, self_state, s_j, limits, params.m * params.eta) > 0.0:
            return False
    return True


def dm_step(dm: DmState, fsc_val: bool, rsc_val: bool, step: int) -> DmState:
    if dm.mode == Mode.BC and rsc_val:
        return replace(dm, mode=Mode.AC, last_switch_step=step)
    if dm.mode == Mode.AC and fsc_val:
        return replace(dm, mode=Mode.BC, last_switch_step=step)
    return dm
