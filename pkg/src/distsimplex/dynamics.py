"""Agent state, double-integrator dynamics and spatial neighborhoods."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite, sqrt

import numpy as np

ACTION_TOL = 1e-9


class CorruptStateError(FloatingPointError):
    """A state or action component is NaN or infinite."""


def vec2(x, y=None) -> np.ndarray:
    if y is None:
        x, y = x
    return np.array([float(x), float(y)])


def norm(v) -> float:
    return sqrt(v[0] * v[0] + v[1] * v[1])


def clip_rows(v: np.ndarray, bound: float) -> np.ndarray:
    """Row-wise clip_norm of an (n, 2) array, with identical arithmetic."""
    out = np.array(v, dtype=float)
    x, y = out[:, 0], out[:, 1]
    n = np.sqrt(x * x + y * y)
    for i in np.nonzero(n > bound)[0]:
        out[i] = clip_norm(out[i], bound)
    return out


def clip_norm(v, bound: float) -> np.ndarray:
    """Scale ``v`` back onto the disk of radius ``bound``, keeping its direction.

    The result satisfies ``norm(result) <= bound`` exactly in floating point,
    so clipping twice is the same as clipping once.
    """
    x, y = float(v[0]), float(v[1])
    n = sqrt(x * x + y * y)
    if n <= bound:
        return np.array([x, y])
    scale = bound / n
    x *= scale
    y *= scale
    shrink = 1.0 - 2.0 ** -52
    while sqrt(x * x + y * y) > bound:
        x *= shrink
        y *= shrink
    return np.array([x, y])


@dataclass(frozen=True)
class PhysicalLimits:
    a_max: float
    v_max: float
    sense_radius: float
    d_min: float
    eta: float

    def __post_init__(self):
        for name in ("a_max", "v_max", "sense_radius", "d_min", "eta"):
            value = getattr(self, name)
            if not (isfinite(value) and value > 0):
                raise ValueError(f"PhysicalLimits.{name} must be finite and > 0 (got {value!r})")
        if not self.d_min < self.sense_radius:
            raise ValueError(
                f"PhysicalLimits requires d_min < sense_radius "
                f"(d_min={self.d_min}, sense_radius={self.sense_radius})"
            )


@dataclass(frozen=True)
class AgentState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(2)
        v = np.asarray(self.velocity, dtype=float).reshape(2)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise CorruptStateError(f"non-finite agent state p={p}, v={v}")
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "velocity", v)

    @classmethod
    def _trusted(cls, p: np.ndarray, v: np.ndarray) -> "AgentState":
        # rows of an already validated, read-only MasState
        obj = object.__new__(cls)
        object.__setattr__(obj, "position", p)
        object.__setattr__(obj, "velocity", v)
        return obj

    @classmethod
    def at(cls, px, py, vx=0.0, vy=0.0) -> "AgentState":
        return cls(vec2(px, py), vec2(vx, vy))

    @property
    def speed(self) -> float:
        return norm(self.velocity)


@dataclass(frozen=True)
class MasState:
    """Synchronous snapshot of the whole system.

    ``positions`` and ``velocities`` are read-only (n, 2) arrays; controllers
    evaluated within a step all read the same snapshot.
    """

    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0
    step_index: int = 0
    agents: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.array(self.positions, dtype=float).reshape(-1, 2)
        v = np.array(self.velocities, dtype=float).reshape(-1, 2)
        if p.shape != v.shape:
            raise ValueError("positions and velocities must have the same shape")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise CorruptStateError(f"non-finite system state at step {self.step_index}")
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "agents", tuple(AgentState._trusted(p[i], v[i]) for i in range(len(p))))

    @classmethod
    def from_agents(cls, agents, time=0.0, step_index=0) -> "MasState":
        return cls(
            np.array([a.position for a in agents]).reshape(-1, 2),
            np.array([a.velocity for a in agents]).reshape(-1, 2),
            time,
            step_index,
        )

    @property
    def n(self) -> int:
        return len(self.positions)


def step_dynamics(state: AgentState, action, limits: PhysicalLimits) -> AgentState:
    """Advance one control period under a zero-order-hold acceleration.

    p' = p + v eta + a eta^2 / 2, v' = clip_norm(v + a eta, v_max).
    """
    ax, ay = float(action[0]), float(action[1])
    if not (isfinite(ax) and isfinite(ay)):
        raise CorruptStateError(f"non-finite action {ax!r}, {ay!r}")
    if sqrt(ax * ax + ay * ay) > limits.a_max + ACTION_TOL:
        raise ValueError(f"action norm exceeds a_max={limits.a_max}; clip before stepping")
    eta = limits.eta
    px, py = state.position
    vx, vy = state.velocity
    p = vec2(px + vx * eta + 0.5 * ax * eta * eta, py + vy * eta + 0.5 * ay * eta * eta)
    v = clip_norm((vx + ax * eta, vy + ay * eta), limits.v_max)
    return AgentState(p, v)


def neighbors(state: MasState, agent_index: int, limits: PhysicalLimits) -> list[int]:
    """Indices j != i with ||p_i - p_j|| < sense_radius, ascending."""
    n = state.n
    if not 0 <= agent_index < n:
        raise IndexError(f"agent index {agent_index} out of range for {n} agents")
    p = state.positions
    px, py = p[agent_index]
    r = limits.sense_radius
    out = []
    for j in range(n):
        if j == agent_index:
            continue
        dx = px - p[j, 0]
        dy = py - p[j, 1]
        if sqrt(dx * dx + dy * dy) < r:
            out.append(j)
    return out
