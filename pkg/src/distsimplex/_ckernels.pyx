# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_pykernels``.

Same signatures, same floating-point operation order; build without
-ffast-math and with -ffp-contract=off so results match bit for bit.
"""
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

BACKEND = "compiled"

STATUS_OPTIMAL = 0
STATUS_FEASIBLE_FALLBACK = 1
STATUS_INFEASIBLE_FALLBACK = 2

cdef double FEAS_TOL = 1e-10
cdef double RELAXED_TOL = 1e-6
cdef double TIE_TOL = 1e-12
cdef int BISECT_ITERS = 64


cdef inline double _signed_root(double a_max, double gap) noexcept nogil:
    if gap >= 0.0:
        return sqrt(4.0 * a_max * gap)
    return -sqrt(-4.0 * a_max * gap)


def signed_root(double a_max, double gap):
    return _signed_root(a_max, gap)


def pair_h(double dpx, double dpy, double dvx, double dvy, double a_max, double d_min):
    cdef double dist = sqrt(dpx * dpx + dpy * dpy)
    if dist == 0.0:
        raise ValueError("coincident positions: pairwise CBF undefined")
    cdef double approach = -(dpx * dvx + dpy * dvy) / dist
    return _signed_root(a_max, dist - d_min) - approach, dist, approach


def pair_lie(double dpx, double dpy, double dvx, double dvy, double a_max, double d_min):
    cdef double dist = sqrt(dpx * dpx + dpy * dpy)
    cdef double gap = dist - d_min
    if not gap > 0.0:
        raise ValueError("Lie derivative undefined at or inside d_min (distance %r)" % dist)
    cdef double dot = dpx * dvx + dpy * dvy
    cdef double vsq = dvx * dvx + dvy * dvy
    cdef double root = sqrt(4.0 * a_max * gap)
    cdef double drift = -(dot * dot) / (dist * dist * dist) + vsq / dist + 2.0 * a_max * dot / (dist * root)
    return drift, dpx / dist, dpy / dist


def reach_lower_bound(double dist, double approach, double speed_i, double speed_j,
                      double a_max, double v_max, double d_min, double horizon):
    cdef double d_low = dist - approach * horizon - a_max * horizon * horizon
    cdef double slack_i = speed_i + a_max * horizon - v_max
    cdef double slack_j = speed_j + a_max * horizon - v_max
    cdef double s_high = approach + 2.0 * a_max * horizon
    if slack_i > 0.0:
        s_high += slack_i
    if slack_j > 0.0:
        s_high += slack_j
    return _signed_root(a_max, d_low - d_min) - s_high


def min_pair_distance(xs, ys):
    cdef Py_ssize_t n = len(xs), i, j
    cdef double best = float("inf"), dx, dy, d
    cdef double[:] cx = _as_array(xs)
    cdef double[:] cy = _as_array(ys)
    for i in range(n):
        for j in range(i + 1, n):
            dx = cx[i] - cx[j]
            dy = cy[i] - cy[j]
            d = sqrt(dx * dx + dy * dy)
            if d < best:
                best = d
    return best


cdef double[:] _as_array(seq):
    import array
    return array.array("d", [float(v) for v in seq])


# -- 2-D linear program ------------------------------------------------------

cdef struct Best:
    int found
    double obj
    double nsq
    double x
    double y


cdef inline bint _violation(double x, double y, double* nx, double* ny, double* off,
                            int k, double r, double tol) noexcept nogil:
    cdef int a
    if x * x + y * y > (r + tol) * (r + tol):
        return True
    for a in range(k):
        if nx[a] * x + ny[a] * y - off[a] > tol:
            return True
    return False


cdef inline bint _better(double obj, double nsq, double x, double y, Best* b) noexcept nogil:
    if obj > b.obj + TIE_TOL * (1.0 + fabs(b.obj)):
        return True
    if obj < b.obj - TIE_TOL * (1.0 + fabs(b.obj)):
        return False
    if nsq < b.nsq - TIE_TOL * (1.0 + b.nsq):
        return True
    if nsq > b.nsq + TIE_TOL * (1.0 + b.nsq):
        return False
    if x < b.x:
        return True
    if x > b.x:
        return False
    return y < b.y


cdef inline void _offer(double x, double y, double gx, double gy, bint zero_grad,
                        double* nx, double* ny, double* off, int k, double r, double tol,
                        Best* b) noexcept nogil:
    cdef double nsq, obj
    if _violation(x, y, nx, ny, off, k, r, tol):
        return
    nsq = x * x + y * y
    if zero_grad:
        obj = -nsq
    else:
        obj = gx * x + gy * y
    if not b.found or _better(obj, nsq, x, y, b):
        b.found = 1
        b.obj = obj
        b.nsq = nsq
        b.x = x
        b.y = y


cdef Best _enumerate(double gx, double gy, double* nx, double* ny, double* off, int k,
                     double r, double tol) noexcept nogil:
    cdef Best b
    cdef bint zero_grad = gx == 0.0 and gy == 0.0
    cdef int a, c
    cdef double g, fx, fy, rem, t, det, x, y, m, ux, uy
    b.found = 0
    b.obj = 0.0
    b.nsq = 0.0
    b.x = 0.0
    b.y = 0.0
    if zero_grad:
        _offer(0.0, 0.0, gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
        for a in range(k):
            _offer(nx[a] * off[a], ny[a] * off[a], gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
    else:
        g = sqrt(gx * gx + gy * gy)
        if g == 0.0 or g == INFINITY:
            m = fabs(gx) if fabs(gx) > fabs(gy) else fabs(gy)
            ux = gx / m
            uy = gy / m
            g = sqrt(ux * ux + uy * uy)
            _offer(r * ux / g, r * uy / g, gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
        else:
            _offer(r * gx / g, r * gy / g, gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
    for a in range(k):
        fx = nx[a] * off[a]
        fy = ny[a] * off[a]
        rem = r * r - off[a] * off[a]
        if rem >= 0.0:
            t = sqrt(rem)
            _offer(fx - t * ny[a], fy + t * nx[a], gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
            _offer(fx + t * ny[a], fy - t * nx[a], gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
    for a in range(k):
        for c in range(a + 1, k):
            det = nx[a] * ny[c] - ny[a] * nx[c]
            if det == 0.0:
                continue
            x = (off[a] * ny[c] - ny[a] * off[c]) / det
            y = (nx[a] * off[c] - off[a] * nx[c]) / det
            _offer(x, y, gx, gy, zero_grad, nx, ny, off, k, r, tol, &b)
    return b


def solve_lp(double gx, double gy, nx_seq, ny_seq, off_seq, double r):
    """Maximize g.u subject to n_k.u <= off_k (unit n_k) and |u| <= r.

    Returns (x, y, status).
    """
    cdef int k = len(off_seq), a, it
    cdef double* buf = <double*> malloc((4 * k + 1) * sizeof(double))
    cdef double* nx = buf
    cdef double* ny = buf + k
    cdef double* off = buf + 2 * k
    cdef double* shifted = buf + 3 * k
    cdef double tol, lo, hi, mid, scale
    cdef Best b
    cdef int status
    if buf == NULL:
        raise MemoryError()
    try:
        for a in range(k):
            nx[a] = nx_seq[a]
            ny[a] = ny_seq[a]
            off[a] = off_seq[a]
        scale = 1.0 if r < 1.0 else r
        tol = FEAS_TOL * scale
        with nogil:
            b = _enumerate(gx, gy, nx, ny, off, k, r, tol)
            status = 0
            if not b.found:
                b = _enumerate(gx, gy, nx, ny, off, k, r, RELAXED_TOL * scale)
                status = 1
            if not b.found:
                status = 2
                lo = 0.0
                hi = 0.0
                for a in range(k):
                    if -off[a] > hi:
                        hi = -off[a]
                for it in range(BISECT_ITERS):
                    mid = 0.5 * (lo + hi)
                    for a in range(k):
                        shifted[a] = off[a] + mid
                    if not _enumerate(0.0, 0.0, nx, ny, shifted, k, r, tol).found:
                        lo = mid
                    else:
                        hi = mid
                for a in range(k):
                    shifted[a] = off[a] + hi
                b = _enumerate(0.0, 0.0, nx, ny, shifted, k, r, tol)
                if not b.found:
                    b.x = 0.0
                    b.y = 0.0
        return b.x, b.y, status
    finally:
        free(buf)
