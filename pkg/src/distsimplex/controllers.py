"""Advanced (unverified) controllers: Reynolds flocking and way-point following."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from math import sqrt

import numpy as np

from .dynamics import AgentState, PhysicalLimits, clip_norm, vec2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReynoldsWeights:
    w_s: float = 3.0
    w_c: float = 1.5
    w_al: float = 0.5

    def __post_init__(self):
        for name in ("w_s", "w_c", "w_al"):
            if getattr(self, name) < 0:
                raise ValueError(f"ReynoldsWeights.{name} must be >= 0")


def reynolds_action(self_state: AgentState, neighbor_states, weights: ReynoldsWeights,
                    limits: PhysicalLimits) -> np.ndarray:
    """Separation + cohesion + alignment, clipped to the a_max disk.

    separation: sum of (p_i - p_j) / |p_i - p_j|^2
    cohesion:   centroid of neighbor positions - p_i
    alignment:  mean neighbor velocity - v_i
    """
    k = len(neighbor_states)
    if k == 0:
        return vec2(0.0, 0.0)
    px, py = float(self_state.position[0]), float(self_state.position[1])
    vx, vy = float(self_state.velocity[0]), float(self_state.velocity[1])
    sx = sy = cx = cy = mx = my = 0.0
    for s_j in neighbor_states:
        dx = px - float(s_j.position[0])
        dy = py - float(s_j.position[1])
        dsq = dx * dx + dy * dy
        if dsq == 0.0:
            log.warning("coincident neighbor at (%g, %g); pushing along +x", px, py)
            sx += limits.a_max
        else:
            sx += dx / dsq
            sy += dy / dsq
        cx += float(s_j.position[0])
        cy += float(s_j.position[1])
        mx += float(s_j.velocity[0])
        my += float(s_j.velocity[1])
    ax = weights.w_s * sx + weights.w_c * (cx / k - px) + weights.w_al * (mx / k - vx)
    ay = weights.w_s * sy + weights.w_c * (cy / k - py) + weights.w_al * (my / k - vy)
    return clip_norm((ax, ay), limits.a_max)


@dataclass(frozen=True)
class WaypointPlan:
    waypoints: tuple = ()
    current_index: int = 0
    capture_radius: float = 0.1

    def __post_init__(self):
        wps = tuple((float(x), float(y)) for x, y in self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        if not 0 <= self.current_index <= len(wps):
            raise ValueError("WaypointPlan.current_index out of range")

    @property
    def done(self) -> bool:
        return self.current_index >= len(self.waypoints)


def waypoint_action(self_state: AgentState, plan: WaypointPlan, limits: PhysicalLimits,
                    k_p: float = 2.0, k_d: float = 1.5):
    """PD pull toward the next way-point; brake to rest once the plan is finished.

    Returns (action, updated plan).  Captured way-points are skipped before
    the action is computed, so the index never moves backwards.
    """
    px, py = float(self_state.position[0]), float(self_state.position[1])
    vx, vy = float(self_state.velocity[0]), float(self_state.velocity[1])
    idx = plan.current_index
    while idx < len(plan.waypoints):
        wx, wy = plan.waypoints[idx]
        dx, dy = wx - px, wy - py
        if sqrt(dx * dx + dy * dy) < plan.capture_radius:
            idx += 1
        else:
            break
    if idx != plan.current_index:
        plan = replace(plan, current_index=idx)
    if idx >= len(plan.waypoints):
        return clip_norm((-k_d * vx, -k_d * vy), limits.a_max), plan
    wx, wy = plan.waypoints[idx]
    ax = k_p * (wx - px) - k_d * vx
    ay = k_p * (wy - py) - k_d * vy
    return clip_norm((ax, ay), limits.a_max), plan
