"""Pairwise braking barrier and the per-agent admissible action set.

h_ij = sqrt(4 a (|dp| - d_min)) - s, where s = -(dp . dv) / |dp| is the
closing speed along the line joining the two agents.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite, sqrt

import numpy as np

from . import kernels
from .dynamics import AgentState, PhysicalLimits, vec2

# neighbors closer than d_min + DOMAIN_EPS get the fallback half-plane
DOMAIN_EPS = 1e-6


@dataclass(frozen=True)
class PairwiseCbf:
    a_max: float
    d_min: float
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("a_max", "d_min", "gamma"):
            value = getattr(self, name)
            if not (isfinite(value) and value > 0):
                raise ValueError(f"PairwiseCbf.{name} must be finite and > 0 (got {value!r})")

    @classmethod
    def from_limits(cls, limits: PhysicalLimits, gamma: float = 1.0) -> "PairwiseCbf":
        return cls(limits.a_max, limits.d_min, gamma)

    def alpha(self, h: float) -> float:
        return self.gamma * h * h * h


@dataclass(frozen=True)
class LieDecomposition:
    drift: float
    coeff_i: np.ndarray
    coeff_j: np.ndarray

    def rate(self, a_i, a_j) -> float:
        return (
            self.drift
            + self.coeff_i[0] * a_i[0] + self.coeff_i[1] * a_i[1]
            + self.coeff_j[0] * a_j[0] + self.coeff_j[1] * a_j[1]
        )


@dataclass(frozen=True)
class HalfPlane:
    """normal . u <= offset, with a unit-length normal."""

    normal: np.ndarray
    offset: float

    @classmethod
    def make(cls, normal, offset: float) -> "HalfPlane | None":
        """Normalize; returns None for a vacuous constraint 0 . u <= offset >= 0."""
        nx, ny = float(normal[0]), float(normal[1])
        n = sqrt(nx * nx + ny * ny)
        if n == 0.0:
            if offset >= 0.0:
                return None
            raise ValueError(f"infeasible constant constraint 0 <= {offset}")
        return cls(vec2(nx / n, ny / n), float(offset) / n)

    def holds(self, u, tol: float = 0.0) -> bool:
        return self.normal[0] * u[0] + self.normal[1] * u[1] - self.offset <= tol


@dataclass(frozen=True)
class AdmissibleSet:
    halfplanes: tuple = ()
    action_bound: float = 1.0
    # indices of the neighbors that contributed each half-plane (None for unary ones)
    sources: tuple = field(default=(), compare=False)

    def contains(self, u, tol: float = 1e-9) -> bool:
        if sqrt(u[0] * u[0] + u[1] * u[1]) > self.action_bound + tol:
            return False
        return all(hp.holds(u, tol) for hp in self.halfplanes)

    def arrays(self) -> tuple[list, list, list]:
        return (
            [float(hp.normal[0]) for hp in self.halfplanes],
            [float(hp.normal[1]) for hp in self.halfplanes],
            [float(hp.offset) for hp in self.halfplanes],
        )


def _rel(s_i: AgentState, s_j: AgentState):
    return (
        float(s_i.position[0] - s_j.position[0]),
        float(s_i.position[1] - s_j.position[1]),
        float(s_i.velocity[0] - s_j.velocity[0]),
        float(s_i.velocity[1] - s_j.velocity[1]),
    )


def eval_h(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState) -> float:
    h, _, _ = kernels.pair_h(*_rel(s_i, s_j), cbf.a_max, cbf.d_min)
    return h


def approach_speed(s_i: AgentState, s_j: AgentState) -> float:
    dpx, dpy, dvx, dvy = _rel(s_i, s_j)
    dist = sqrt(dpx * dpx + dpy * dpy)
    return -(dpx * dvx + dpy * dvy) / dist


def lie_decomposition(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState) -> LieDecomposition:
    drift, cx, cy = kernels.pair_lie(*_rel(s_i, s_j), cbf.a_max, cbf.d_min)
    return LieDecomposition(drift, vec2(cx, cy), vec2(-cx, -cy))


def pairwise_constraint(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState):
    """Binary constraint P.u_i + Q.u_j <= b equivalent to hdot >= -alpha(h)."""
    lie = lie_decomposition(cbf, s_i, s_j)
    h = eval_h(cbf, s_i, s_j)
    return -lie.coeff_i, -lie.coeff_j, lie.drift + cbf.alpha(h)


def partition(P, Q, b: float):
    """Split the binary constraint into two unary halves with budget b/2 each.

    Returns raw (normal, offset) pairs; HalfPlane.make normalizes them.
    """
    return (np.asarray(P, dtype=float), b / 2.0), (np.asarray(Q, dtype=float), b / 2.0)


def fallback_halfplane(s_i: AgentState, s_j: AgentState, a_max: float) -> HalfPlane:
    """Accelerate away from j with at least half throttle."""
    dpx, dpy, _, _ = _rel(s_i, s_j)
    dist = sqrt(dpx * dpx + dpy * dpy)
    if dist == 0.0:
        raise ValueError("coincident positions: pairwise CBF undefined")
    return HalfPlane(vec2(-dpx / dist, -dpy / dist), -a_max / 2.0)


def neighbor_halfplane(cbf: PairwiseCbf, s_i: AgentState, s_j: AgentState) -> HalfPlane | None:
    dpx, dpy, dvx, dvy = _rel(s_i, s_j)
    dist = sqrt(dpx * dpx + dpy * dpy)
    if dist == 0.0:
        raise ValueError("coincident positions: pairwise CBF undefined")
    if dist <= cbf.d_min + DOMAIN_EPS:
        return fallback_halfplane(s_i, s_j, cbf.a_max)
    P, Q, b = pairwise_constraint(cbf, s_i, s_j)
    (normal, offset), _ = partition(P, Q, b)
    return HalfPlane.make(normal, offset)


def admissible_set(
    cbf: PairwiseCbf,
    self_state: AgentState,
    neighbor_states,
    limits: PhysicalLimits,
    unary=(),
) -> AdmissibleSet:
    """The i-side half of every neighbor's partitioned constraint, plus the action disk.

    ``unary`` takes extra per-agent half-planes (A_i u <= b_i); none of the
    shipped scenarios use one.
    """
    planes = []
    sources = []
    for k, s_j in enumerate(neighbor_states):
        hp = neighbor_halfplane(cbf, self_state, s_j)
        if hp is not None:
            planes.append(hp)
            sources.append(k)
    for hp in unary:
        planes.append(hp)
        sources.append(None)
    return AdmissibleSet(tuple(planes), limits.a_max, tuple(sources))
