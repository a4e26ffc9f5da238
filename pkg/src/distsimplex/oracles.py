"""Independent reference computations and randomized verification suites.

The oracles here deliberately avoid the library's own formulas: the barrier is
re-evaluated with numpy, the LP is brute-forced on a grid, and dynamics are
integrated with many small Euler steps.  Each suite returns a SuiteResult and
can be run from the command line with ``distsimplex oracle <name>``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .baseline import build_objective, solve_bc
from .cbf import PairwiseCbf, admissible_set, lie_decomposition, partition
from .decision import SwitchParams, fsc, rsc
from .dynamics import AgentState, MasState, PhysicalLimits, clip_rows, neighbors

FLOCKING_LIMITS = PhysicalLimits(a_max=5.0, v_max=2.5, sense_radius=4.0, d_min=2.0, eta=0.1)
NUM_EPS = 1e-6


@dataclass
class SuiteResult:
    name: str
    samples: int
    failures: int
    worst: float
    tolerance: float
    elapsed: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} {self.name}: {self.samples} samples, {self.failures} failures, "
                f"worst={self.worst:.3g} (tol {self.tolerance:g}), {self.elapsed:.2f}s")


# -- reference functions ----------------------------------------------------

def h_ref(dp, dv, a_max: float, d_min: float):
    """Braking barrier evaluated directly with numpy; accepts (..., 2) arrays."""
    dp = np.asarray(dp, float)
    dv = np.asarray(dv, float)
    dist = np.linalg.norm(dp, axis=-1)
    closing = -np.sum(dp * dv, axis=-1) / dist
    gap = dist - d_min
    return np.sign(gap) * np.sqrt(4.0 * a_max * np.abs(gap)) - closing


def euler_substeps(p, v, a, eta: float, substeps: int = 1000):
    """Forward Euler with ``substeps`` sub-intervals and no velocity clipping."""
    p = np.array(p, float)
    v = np.array(v, float)
    a = np.asarray(a, float)
    dt = eta / substeps
    for _ in range(substeps):
        p = p + v * dt
        v = v + a * dt
    return p, v


def neighbors_bruteforce(positions, i: int, radius: float) -> list[int]:
    pos = np.asarray(positions, float)
    return [j for j in range(len(pos)) if j != i and float(np.linalg.norm(pos[i] - pos[j])) < radius]


def lp_grid(gx, gy, normals, offsets, r: float, cells: int = 400):
    """Best grid point of max g.u over {|u| <= r, n_k.u <= o_k}; None when the grid misses the set.

    Returns (value, point, increment) where increment is the largest objective
    change between neighboring grid points.
    """
    axis = np.linspace(-r, r, cells)
    ux, uy = np.meshgrid(axis, axis, indexing="ij")
    ok = ux * ux + uy * uy <= r * r + 1e-12
    for (nx, ny), o in zip(normals, offsets):
        ok &= nx * ux + ny * uy <= o + 1e-12
    step = axis[1] - axis[0]
    inc = step * (abs(gx) + abs(gy))
    if not ok.any():
        return None, None, inc
    obj = np.where(ok, gx * ux + gy * uy, -np.inf)
    k = int(np.argmax(obj))
    return float(obj.flat[k]), (float(ux.flat[k]), float(uy.flat[k])), inc


def grid_membership(normals, offsets, r: float, step: float):
    """Boolean mask and coordinates of grid points inside disk and half-planes."""
    axis = np.arange(-r, r + step / 2, step)
    ux, uy = np.meshgrid(axis, axis, indexing="ij")
    ok = ux * ux + uy * uy <= r * r
    for (nx, ny), o in zip(normals, offsets):
        ok &= nx * ux + ny * uy <= o
    return ok, ux, uy


def braking_final_gap(dp, dv, a_max: float, dt: float = 1e-4, max_time: float = 100.0) -> float:
    """Both agents brake along the joining line at a_max each; returns the closest distance reached."""
    dp = np.asarray(dp, float)
    dv = np.asarray(dv, float)
    dist = float(np.linalg.norm(dp))
    closing = -float(dp @ dv) / dist
    best = dist
    t = 0.0
    while closing > 0.0 and t < max_time:
        dist -= closing * dt + a_max * dt * dt  # relative deceleration 2 a_max
        closing -= 2.0 * a_max * dt
        best = min(best, dist)
        t += dt
    return best


# -- sampling helpers -------------------------------------------------------

def _unit(rng, n):
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([np.cos(th), np.sin(th)], axis=-1)


def _disk(rng, n, radius):
    return _unit(rng, n) * (radius * np.sqrt(rng.uniform(0.0, 1.0, n)))[:, None]


def sample_pair_states(rng, n, limits: PhysicalLimits, min_h: float = 0.0, max_gap: float | None = None):
    """Pair states (p_i, v_i, p_j, v_j) inside the sensing radius with h >= min_h."""
    max_gap = limits.sense_radius - limits.d_min if max_gap is None else max_gap
    out = []
    while len(out) < n:
        k = 4 * (n - len(out)) + 16
        dist = limits.d_min + rng.uniform(1e-3, max_gap, k)
        dirs = _unit(rng, k)
        p_j = rng.uniform(-5.0, 5.0, (k, 2))
        p_i = p_j + dirs * dist[:, None]
        v_i = _disk(rng, k, limits.v_max)
        v_j = _disk(rng, k, limits.v_max)
        h = h_ref(p_i - p_j, v_i - v_j, limits.a_max, limits.d_min)
        keep = np.flatnonzero((h >= min_h) & (dist < limits.sense_radius))
        out.extend((p_i[q], v_i[q], p_j[q], v_j[q]) for q in keep[: n - len(out)])
    return out


def _step_pairs(p, v, a, limits):
    """Vectorized zero-order-hold step with the library's arithmetic and clipping."""
    eta = limits.eta
    return p + v * eta + 0.5 * a * eta * eta, clip_rows(v + a * eta, limits.v_max)


def _finish(res: SuiteResult, t0: float) -> SuiteResult:
    res.elapsed = time.perf_counter() - t0
    return res


# -- suites -----------------------------------------------------------------

def suite_partition(samples: int = 100_000, seed: int = 0) -> SuiteResult:
    """Both unary halves hold  =>  the binary constraint holds."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    worst = -np.inf
    checked = 0
    for _ in range(samples):
        P = rng.normal(size=2) * rng.uniform(0, 10)
        Q = rng.normal(size=2) * rng.uniform(0, 10)
        b = rng.uniform(-50, 50)
        u_i = rng.normal(size=2) * 5
        u_j = rng.normal(size=2) * 5
        (ni, oi), (nj, oj) = partition(P, Q, b)
        # push samples that miss a half onto its boundary so the implication is exercised
        si = float(ni @ u_i) - oi
        if si > 0 and ni @ ni > 0:
            u_i = u_i - ni * si / float(ni @ ni)
        sj = float(nj @ u_j) - oj
        if sj > 0 and nj @ nj > 0:
            u_j = u_j - nj * sj / float(nj @ nj)
        if float(ni @ u_i) <= oi and float(nj @ u_j) <= oj:
            checked += 1
            excess = float(P @ u_i + Q @ u_j) - b
            worst = max(worst, excess)
            # exact in real arithmetic; allow rounding of the four products
            if excess > 1e-12 * (1.0 + abs(b) + float(np.abs(P).sum() + np.abs(Q).sum()) * 10):
                fails += 1
    return _finish(SuiteResult("partition", samples, fails, float(worst), 0.0, detail={"both_halves_held": checked}), t0)


def suite_lie(samples: int = 10_000, seed: int = 0, limits: PhysicalLimits = FLOCKING_LIMITS) -> SuiteResult:
    """Analytic hdot against a central difference of h along exact (unclipped) trajectories."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cbf = PairwiseCbf.from_limits(limits)
    states = sample_pair_states(rng, samples, limits)
    a_i = _disk(rng, samples, limits.a_max)
    a_j = _disk(rng, samples, limits.a_max)
    delta = 1e-6 * limits.eta
    fails = 0
    worst = 0.0
    for k, (p_i, v_i, p_j, v_j) in enumerate(states):
        lie = lie_decomposition(cbf, AgentState(p_i, v_i), AgentState(p_j, v_j))
        analytic = lie.rate(a_i[k], a_j[k])
        dp = p_i - p_j
        dv = v_i - v_j
        da = a_i[k] - a_j[k]
        hp = h_ref(dp + dv * delta + 0.5 * da * delta**2, dv + da * delta, cbf.a_max, cbf.d_min)
        hm = h_ref(dp - dv * delta + 0.5 * da * delta**2, dv - da * delta, cbf.a_max, cbf.d_min)
        fd = float(hp - hm) / (2 * delta)
        err = abs(analytic - fd)
        rel = err / abs(fd) if fd != 0 else np.inf
        if not (rel <= 1e-4 or err <= 1e-6):
            fails += 1
        worst = max(worst, min(rel, err))
    return _finish(SuiteResult("lie", samples, fails, worst, 1e-4), t0)


def worst_case_actions(p_i, p_j, a_max):
    """The four +-a_max combinations along the joining line."""
    u = (p_i - p_j) / np.linalg.norm(p_i - p_j)
    return [(s_i * a_max * u, s_j * a_max * u) for s_i in (-1, 1) for s_j in (-1, 1)]


def suite_fsc(samples: int = 1000, actions: int = 1000, seed: int = 0,
              limits: PhysicalLimits = FLOCKING_LIMITS, params: SwitchParams | None = None) -> SuiteResult:
    """States with FSC false stay at h >= -1e-6 after one step under any bounded action pair."""
    t0 = time.perf_counter()
    params = params or SwitchParams(3, limits.eta)
    rng = np.random.default_rng(seed)
    cbf = PairwiseCbf.from_limits(limits)
    kept = []
    # concentrate near the switching boundary, where soundness is actually at stake
    while len(kept) < samples:
        for p_i, v_i, p_j, v_j in sample_pair_states(rng, 4 * samples, limits, max_gap=1.0):
            if not fsc(cbf, AgentState(p_i, v_i), [AgentState(p_j, v_j)], limits, params):
                kept.append((p_i, v_i, p_j, v_j))
                if len(kept) == samples:
                    break
    fails = 0
    worst = np.inf
    total = 0
    for p_i, v_i, p_j, v_j in kept:
        a_i = _disk(rng, actions, limits.a_max)
        a_j = _disk(rng, actions, limits.a_max)
        extra = worst_case_actions(p_i, p_j, limits.a_max)
        a_i = np.vstack([a_i, [w[0] for w in extra]])
        a_j = np.vstack([a_j, [w[1] for w in extra]])
        m = len(a_i)
        pi2, vi2 = _step_pairs(np.tile(p_i, (m, 1)), np.tile(v_i, (m, 1)), a_i, limits)
        pj2, vj2 = _step_pairs(np.tile(p_j, (m, 1)), np.tile(v_j, (m, 1)), a_j, limits)
        h2 = h_ref(pi2 - pj2, vi2 - vj2, cbf.a_max, cbf.d_min)
        total += m
        fails += int(np.count_nonzero(h2 < -NUM_EPS))
        worst = min(worst, float(h2.min()))
    return _finish(SuiteResult("fsc", total, fails, worst, -NUM_EPS, detail={"states": samples}), t0)


def random_lp(rng, r: float, max_planes: int = 6):
    """A feasible instance: random half-planes that all admit a random interior point."""
    k = int(rng.integers(0, max_planes + 1))
    g = rng.normal(size=2)
    u0 = _disk(rng, 1, r)[0]
    normals = _unit(rng, k)
    offsets = normals @ u0 + rng.exponential(0.3 * r, k) if k else np.zeros(0)
    return g, normals, offsets


def suite_lp(samples: int = 1000, seed: int = 0, r: float = 5.0, cells: int = 400) -> SuiteResult:
    """Exact solver against a dense grid: never worse by more than one grid increment, always feasible."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    infeasible = 0
    worst = -np.inf
    for _ in range(samples):
        g, normals, offsets = random_lp(rng, r)
        x, y, status = kernels.solve_lp(float(g[0]), float(g[1]), list(normals[:, 0]) if len(normals) else [],
                                        list(normals[:, 1]) if len(normals) else [], list(offsets), r)
        tol = 1e-9
        feas = x * x + y * y <= (r + tol) ** 2 and all(
            n[0] * x + n[1] * y <= o + tol for n, o in zip(normals, offsets))
        if not feas or status != kernels.STATUS_OPTIMAL:
            infeasible += 1
        val, _, inc = lp_grid(g[0], g[1], normals, offsets, r, cells)
        if val is None:
            continue
        gap = val - (g[0] * x + g[1] * y)
        worst = max(worst, gap / inc if inc else 0.0)
        if gap > inc:
            fails += 1
    return _finish(SuiteResult("lp", samples, fails + infeasible, float(worst), 1.0,
                               detail={"worse_than_grid": fails, "infeasible_output": infeasible}), t0)


def pair_bc_actions(cbf, limits, p, v):
    """BC action of each agent of a two-agent system, both reading the same snapshot."""
    st = MasState(p, v)
    acts = np.zeros((2, 2))
    for i in range(2):
        nbr = [st.agents[j] for j in neighbors(st, i, limits)]
        obj = build_objective(cbf, st.agents[i], nbr)
        acts[i] = solve_bc(obj, admissible_set(cbf, st.agents[i], nbr, limits)).action
    return acts


def suite_invariance(samples: int = 1000, steps: int = 100, seed: int = 0,
                     limits: PhysicalLimits = FLOCKING_LIMITS, min_h: float = 0.1) -> SuiteResult:
    """Both agents on the BC from a recoverable state: h stays >= -1e-6."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cbf = PairwiseCbf.from_limits(limits)
    fails = 0
    worst = np.inf
    for p_i, v_i, p_j, v_j in sample_pair_states(rng, samples, limits, min_h=min_h):
        p = np.array([p_i, p_j])
        v = np.array([v_i, v_j])
        low = np.inf
        for _ in range(steps):
            a = pair_bc_actions(cbf, limits, p, v)
            p, v = _step_pairs(p, v, a, limits)
            low = min(low, float(h_ref(p[0] - p[1], v[0] - v[1], cbf.a_max, cbf.d_min)))
        worst = min(worst, low)
        if low < -NUM_EPS:
            fails += 1
    return _finish(SuiteResult("invariance", samples, fails, worst, -NUM_EPS, detail={"steps": steps}), t0)


def suite_hysteresis(samples: int = 1000, seed: int = 0, limits: PhysicalLimits = FLOCKING_LIMITS,
                     params: SwitchParams | None = None, max_gap: float | None = 1.5,
                     max_batches: int = 200) -> SuiteResult:
    """From a state where RSC holds, FSC stays false for m steps while both agents run the BC.

    Too few RSC states within ``max_batches`` sampling rounds counts as a failure.
    """
    t0 = time.perf_counter()
    params = params or SwitchParams(3, limits.eta)
    rng = np.random.default_rng(seed)
    cbf = PairwiseCbf.from_limits(limits)
    fails = 0
    done = 0
    shortest = np.inf
    for _ in range(max_batches):
        if done >= samples:
            break
        for p_i, v_i, p_j, v_j in sample_pair_states(rng, samples, limits, max_gap=max_gap):
            if done >= samples:
                break
            s_i, s_j = AgentState(p_i, v_i), AgentState(p_j, v_j)
            if not (rsc(cbf, s_i, [s_j], limits, params) and rsc(cbf, s_j, [s_i], limits, params)):
                continue
            done += 1
            p = np.array([p_i, p_j])
            v = np.array([v_i, v_j])
            for k in range(1, params.m + 1):
                a = pair_bc_actions(cbf, limits, p, v)
                p, v = _step_pairs(p, v, a, limits)
                st = MasState(p, v)
                fired = any(
                    fsc(cbf, st.agents[i], [st.agents[j] for j in neighbors(st, i, limits)], limits, params)
                    for i in range(2))
                if fired:
                    shortest = min(shortest, k)
                    fails += 1
                    break
    fails += samples - done
    return _finish(SuiteResult("hysteresis", samples, fails, float(shortest), float(params.m),
                               detail={"trials": done}), t0)


def suite_euler(samples: int = 200, seed: int = 0, limits: PhysicalLimits = FLOCKING_LIMITS) -> SuiteResult:
    """Closed-form step against 1000-substep Euler, for steps that do not hit the speed cap."""
    from .dynamics import step_dynamics

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    worst = 0.0
    used = 0
    while used < samples:
        v = _disk(rng, 1, limits.v_max)[0]
        a = _disk(rng, 1, limits.a_max)[0]
        if np.linalg.norm(v + a * limits.eta) > limits.v_max:
            continue
        used += 1
        p = rng.uniform(-10, 10, 2)
        got = step_dynamics(AgentState(p, v), a, limits)
        pe, ve = euler_substeps(p, v, a, limits.eta)
        err = max(float(np.abs(got.position - pe).max()), float(np.abs(got.velocity - ve).max()))
        worst = max(worst, err)
        if err > 1e-6:
            fails += 1
    return _finish(SuiteResult("euler", samples, fails, worst, 1e-6), t0)


def suite_neighbors(samples: int = 200, seed: int = 0, limits: PhysicalLimits = FLOCKING_LIMITS) -> SuiteResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(samples):
        n = int(rng.integers(1, 20))
        pos = rng.uniform(-6, 6, (n, 2))
        st = MasState(pos, np.zeros((n, 2)))
        for i in range(n):
            if neighbors(st, i, limits) != neighbors_bruteforce(pos, i, limits.sense_radius):
                fails += 1
    return _finish(SuiteResult("neighbors", samples, fails, float(fails), 0.0), t0)


def suite_membership(samples: int = 100, seed: int = 0, limits: PhysicalLimits = FLOCKING_LIMITS) -> SuiteResult:
    """AdmissibleSet.contains against direct evaluation of the i-side constraint halves on a grid."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cbf = PairwiseCbf.from_limits(limits)
    fails = 0
    step = limits.a_max / 200
    for _ in range(samples):
        k = int(rng.integers(0, 4))
        me = AgentState(rng.uniform(-1, 1, 2), _disk(rng, 1, limits.v_max)[0])
        nbrs = []
        for p_i, v_i, p_j, v_j in sample_pair_states(rng, k, limits):
            nbrs.append(AgentState(me.position - (p_i - p_j), me.velocity - (v_i - v_j)))
        adm = admissible_set(cbf, me, nbrs, limits)
        # reference: -coeff_i . u <= (drift + gamma h^3) / 2 for each neighbor, straight from h_ref
        normals, offsets = [], []
        for s_j in nbrs:
            dp = me.position - s_j.position
            dv = me.velocity - s_j.velocity
            D = float(np.linalg.norm(dp))
            h = float(h_ref(dp, dv, cbf.a_max, cbf.d_min))
            dot = float(dp @ dv)
            drift = (-(dot**2) / D**3 + float(dv @ dv) / D
                     + 2 * cbf.a_max * dot / (D * np.sqrt(4 * cbf.a_max * (D - cbf.d_min))))
            normals.append(-dp / D)
            offsets.append((drift + cbf.gamma * h**3) / 2)
        ok, ux, uy = grid_membership(normals, offsets, limits.a_max, step)
        # skip grid points within rounding distance of a boundary
        margin = np.full(ux.shape, limits.a_max - np.sqrt(ux * ux + uy * uy))
        for n, o in zip(normals, offsets):
            margin = np.minimum(margin, np.abs(o - (n[0] * ux + n[1] * uy)))
        pts = np.flatnonzero(margin.ravel() > 1e-7)
        got = np.array([adm.contains((ux.flat[q], uy.flat[q]), tol=0.0) for q in pts[:: max(1, len(pts) // 2000)]])
        ref = ok.ravel()[pts[:: max(1, len(pts) // 2000)]]
        fails += int(np.count_nonzero(got != ref))
    return _finish(SuiteResult("membership", samples, fails, float(fails), 0.0), t0)


SUITES = {
    "partition": suite_partition,
    "lie": suite_lie,
    "fsc": suite_fsc,
    "lp": suite_lp,
    "invariance": suite_invariance,
    "hysteresis": suite_hysteresis,
    "euler": suite_euler,
    "neighbors": suite_neighbors,
    "membership": suite_membership,
}


def run_suite(name: str, **kwargs) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown oracle suite {name!r}; valid names: {', '.join(SUITES)}")
    return SUITES[name](**kwargs)
