"""Baseline controller: maximize the CBF-weighted Lie derivative over the admissible set."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cbf import AdmissibleSet, PairwiseCbf, eval_h, lie_decomposition
from .dynamics import AgentState, vec2

log = logging.getLogger(__name__)

# caps the 1/h weight near the barrier boundary
WEIGHT_EPS = 1e-3

OPTIMAL = "optimal"
FEASIBLE_FALLBACK = "feasible_fallback"
INFEASIBLE_FALLBACK = "infeasible_fallback"
_STATUS = {
    kernels.STATUS_OPTIMAL: OPTIMAL,
    kernels.STATUS_FEASIBLE_FALLBACK: FEASIBLE_FALLBACK,
    kernels.STATUS_INFEASIBLE_FALLBACK: INFEASIBLE_FALLBACK,
}


@dataclass(frozen=True)
class BcObjective:
    gradient: np.ndarray
    constant: float = 0.0


@dataclass(frozen=True)
class LpSolution:
    action: np.ndarray
    status: str
    active_constraints: tuple = ()


def build_objective(cbf: PairwiseCbf, self_state: AgentState, neighbor_states) -> BcObjective:
    """Sum over neighbors of (1/h_ij) * (L_f h_ij + L_g h_ij [u_i; 0]).

    Neighbors' next actions are predicted to be zero.
    """
    gx = gy = const = 0.0
    for s_j in neighbor_states:
        h = eval_h(cbf, self_state, s_j)
        w = 1.0 / max(h, WEIGHT_EPS)
        lie = lie_decomposition(cbf, self_state, s_j)
        gx += w * lie.coeff_i[0]
        gy += w * lie.coeff_i[1]
        const += w * lie.drift
    return BcObjective(vec2(gx, gy), const)


def solve_bc(objective: BcObjective, admissible: AdmissibleSet) -> LpSolution:
    """Exact 2-D LP over (half-planes intersected with the action disk).

    Candidates are the disk point along the gradient, line/circle crossings and
    line/line crossings; ties go to the smaller norm, then smaller x, then y.
    A zero gradient returns the minimum-norm admissible action.
    """
    nx, ny, off = admissible.arrays()
    gx, gy = float(objective.gradient[0]), float(objective.gradient[1])
    x, y, code = kernels.solve_lp(gx, gy, nx, ny, off, float(admissible.action_bound))
    status = _STATUS[code]
    if code != kernels.STATUS_OPTIMAL:
        log.warning("baseline LP returned %s with %d half-planes", status, len(off))
    scale = max(1.0, float(admissible.action_bound))
    active = tuple(
        k for k in range(len(off)) if abs(nx[k] * x + ny[k] * y - off[k]) <= 1e-9 * scale
    )
    return LpSolution(vec2(x, y), status, active)
