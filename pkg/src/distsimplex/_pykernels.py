"""Pure-Python implementation of the numerical kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends return
bit-identical results on IEEE-754 hardware.  Keep the two files in sync.
"""
from math import inf as INF, sqrt

BACKEND = "python"

STATUS_OPTIMAL = 0
STATUS_FEASIBLE_FALLBACK = 1
STATUS_INFEASIBLE_FALLBACK = 2

FEAS_TOL = 1e-10
RELAXED_TOL = 1e-6
TIE_TOL = 1e-12
BISECT_ITERS = 64


def signed_root(a_max, gap):
    """sqrt(4 a gap), extended as an odd function for gap < 0."""
    if gap >= 0.0:
        return sqrt(4.0 * a_max * gap)
    return -sqrt(-4.0 * a_max * gap)


def pair_h(dpx, dpy, dvx, dvy, a_max, d_min):
    """Return (h, distance, approach_speed) for relative state dp = p_i - p_j, dv = v_i - v_j."""
    dist = sqrt(dpx * dpx + dpy * dpy)
    if dist == 0.0:
        raise ValueError("coincident positions: pairwise CBF undefined")
    approach = -(dpx * dvx + dpy * dvy) / dist
    return signed_root(a_max, dist - d_min) - approach, dist, approach


def pair_lie(dpx, dpy, dvx, dvy, a_max, d_min):
    """Return (drift, cx, cy) with hdot = drift + c.(a_i - a_j)."""
    dist = sqrt(dpx * dpx + dpy * dpy)
    gap = dist - d_min
    if not gap > 0.0:
        raise ValueError("Lie derivative undefined at or inside d_min (distance %r)" % dist)
    dot = dpx * dvx + dpy * dvy
    vsq = dvx * dvx + dvy * dvy
    root = sqrt(4.0 * a_max * gap)
    drift = -(dot * dot) / (dist * dist * dist) + vsq / dist + 2.0 * a_max * dot / (dist * root)
    return drift, dpx / dist, dpy / dist


def reach_lower_bound(dist, approach, speed_i, speed_j, a_max, v_max, d_min, horizon):
    """Lower bound on h after `horizon` seconds of any actions with norm <= a_max.

    Distance obeys D'' >= -2 a_max, so D(T) >= D - s T - a T^2 and the approach
    speed grows by at most 2 a T.  Velocity clipping can move each agent's
    velocity by at most max(0, |v| + a T - v_max) beyond the unclipped value.
    """
    d_low = dist - approach * horizon - a_max * horizon * horizon
    slack_i = speed_i + a_max * horizon - v_max
    slack_j = speed_j + a_max * horizon - v_max
    s_high = approach + 2.0 * a_max * horizon
    if slack_i > 0.0:
        s_high += slack_i
    if slack_j > 0.0:
        s_high += slack_j
    return signed_root(a_max, d_low - d_min) - s_high


def min_pair_distance(xs, ys):
    n = len(xs)
    best = float("inf")
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            d = sqrt(dx * dx + dy * dy)
            if d < best:
                best = d
    return best


# -- 2-D linear program over (half-planes intersected with a disk) ----------

def _violation(x, y, nx, ny, off, r, tol):
    if x * x + y * y > (r + tol) * (r + tol):
        return True
    for k in range(len(nx)):
        if nx[k] * x + ny[k] * y - off[k] > tol:
            return True
    return False


def _better(obj, nsq, x, y, b_obj, b_nsq, b_x, b_y):
    if obj > b_obj + TIE_TOL * (1.0 + abs(b_obj)):
        return True
    if obj < b_obj - TIE_TOL * (1.0 + abs(b_obj)):
        return False
    if nsq < b_nsq - TIE_TOL * (1.0 + b_nsq):
        return True
    if nsq > b_nsq + TIE_TOL * (1.0 + b_nsq):
        return False
    if x < b_x:
        return True
    if x > b_x:
        return False
    return y < b_y


def _enumerate(gx, gy, nx, ny, off, r, tol):
    """Best feasible extreme-point candidate, or None.

    With g == 0 the objective is -|u|^2 (minimum-norm feasible point), and
    the candidate list gains the origin and the feet of perpendiculars.
    """
    k = len(nx)
    zero_grad = gx == 0.0 and gy == 0.0
    found = False
    b_obj = b_nsq = b_x = b_y = 0.0

    cands = []
    if zero_grad:
        cands.append((0.0, 0.0))
        for a in range(k):
            cands.append((nx[a] * off[a], ny[a] * off[a]))
    else:
        g = sqrt(gx * gx + gy * gy)
        if g == 0.0 or g == INF:
            # squares under- or overflowed; the direction is all that matters
            m = max(abs(gx), abs(gy))
            ux, uy = gx / m, gy / m
            g = sqrt(ux * ux + uy * uy)
            cands.append((r * ux / g, r * uy / g))
        else:
            cands.append((r * gx / g, r * gy / g))
    for a in range(k):
        # boundary line n.u = o with unit n: foot f = o n, direction (-ny, nx)
        fx = nx[a] * off[a]
        fy = ny[a] * off[a]
        rem = r * r - off[a] * off[a]
        if rem >= 0.0:
            t = sqrt(rem)
            cands.append((fx - t * ny[a], fy + t * nx[a]))
            cands.append((fx + t * ny[a], fy - t * nx[a]))
    for a in range(k):
        for b in range(a + 1, k):
            det = nx[a] * ny[b] - ny[a] * nx[b]
            if det == 0.0:
                continue
            x = (off[a] * ny[b] - ny[a] * off[b]) / det
            y = (nx[a] * off[b] - off[a] * nx[b]) / det
            cands.append((x, y))

    for x, y in cands:
        if _violation(x, y, nx, ny, off, r, tol):
            continue
        nsq = x * x + y * y
        obj = -nsq if zero_grad else gx * x + gy * y
        if not found or _better(obj, nsq, x, y, b_obj, b_nsq, b_x, b_y):
            found = True
            b_obj, b_nsq, b_x, b_y = obj, nsq, x, y
    if not found:
        return None
    return b_x, b_y


def solve_lp(gx, gy, nx, ny, off, r):
    """Maximize g.u subject to n_k.u <= off_k (unit n_k) and |u| <= r.

    Returns (x, y, status).
    """
    tol = FEAS_TOL * (1.0 if r < 1.0 else r)
    best = _enumerate(gx, gy, nx, ny, off, r, tol)
    if best is not None:
        return best[0], best[1], STATUS_OPTIMAL
    best = _enumerate(gx, gy, nx, ny, off, r, RELAXED_TOL * (1.0 if r < 1.0 else r))
    if best is not None:
        return best[0], best[1], STATUS_FEASIBLE_FALLBACK

    # minimax violation: smallest uniform shift t that makes the set nonempty
    lo = 0.0
    hi = 0.0
    for k in range(len(off)):
        if -off[k] > hi:
            hi = -off[k]
    shifted = [0.0] * len(off)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        for k in range(len(off)):
            shifted[k] = off[k] + mid
        if _enumerate(0.0, 0.0, nx, ny, shifted, r, tol) is None:
            lo = mid
        else:
            hi = mid
    for k in range(len(off)):
        shifted[k] = off[k] + hi
    best = _enumerate(0.0, 0.0, nx, ny, shifted, r, tol)
    if best is None:
        return 0.0, 0.0, STATUS_INFEASIBLE_FALLBACK
    return best[0], best[1], STATUS_INFEASIBLE_FALLBACK
