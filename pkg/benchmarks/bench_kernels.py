"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Micro-benchmarks call each backend module directly.  End-to-end runs use a
subprocess per backend because the active backend is fixed at import time.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from distsimplex import kernels
from distsimplex.oracles import random_lp


def _lp_instances(n=2000, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g, normals, offsets = random_lp(rng, 5.0)
        out.append((float(g[0]), float(g[1]), [float(x) for x in normals[:, 0]] if len(normals) else [],
                    [float(y) for y in normals[:, 1]] if len(normals) else [], [float(o) for o in offsets], 5.0))
    return out


def _pair_inputs(n=5000, seed=1):
    rng = np.random.default_rng(seed)
    dp = rng.normal(size=(n, 2)) * 2 + np.array([3.0, 0.0])
    dv = rng.normal(size=(n, 2))
    return [(float(a), float(b), float(c), float(d), 5.0, 2.0) for (a, b), (c, d) in zip(dp, dv)]


def micro(backend, repeat):
    lps = _lp_instances()
    pairs = [p for p in _pair_inputs() if np.hypot(p[0], p[1]) > 2.0]
    xs, ys = list(np.random.default_rng(2).uniform(-10, 10, (2, 200)))
    cases = {
        "solve_lp x2000": lambda: [backend.solve_lp(*a) for a in lps],
        "pair_h x5000": lambda: [backend.pair_h(*a) for a in pairs],
        "pair_lie x5000": lambda: [backend.pair_lie(*a) for a in pairs],
        "min_pair_distance n=200": lambda: backend.min_pair_distance(xs, ys),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


_RUN = """
import time
from distsimplex import builtin, kernels
from distsimplex.harness import run
best = float("inf")
for _ in range({repeat}):
    t = time.perf_counter()
    run(builtin({name!r}, 0))
    best = min(best, time.perf_counter() - t)
print(kernels.BACKEND, best)
"""


def end_to_end(name, pure, repeat):
    env = dict(os.environ, DISTSIMPLEX_PURE="1" if pure else "0")
    res = subprocess.run([sys.executable, "-c", _RUN.format(name=name, repeat=repeat)],
                         env=env, capture_output=True, text=True, check=True)
    backend, secs = res.stdout.split()
    return backend, float(secs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        sys.exit("compiled extension not built; run: python setup.py build_ext --inplace")

    print(f"{'kernel':28s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    py = micro(kernels.python_backend, args.repeat)
    cc = micro(kernels.compiled_backend, args.repeat)
    for name in py:
        print(f"{name:28s} {py[name]:11.4f} {cc[name]:13.4f} {py[name] / cc[name]:7.1f}x")

    print(f"\n{'full run (seed 0)':28s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for name in ("flocking", "waypoint"):
        _, tp = end_to_end(name, True, args.repeat)
        backend, tc = end_to_end(name, False, args.repeat)
        assert backend == "compiled"
        print(f"{name:28s} {tp:11.4f} {tc:13.4f} {tp / tc:7.2f}x")


if __name__ == "__main__":
    main()
