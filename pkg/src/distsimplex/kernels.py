"""Backend selection for the numerical kernels.

The compiled extension is used when it was built; set ``DISTSIMPLEX_PURE=1``
to force the pure-Python fallback (useful for debugging and benchmarking).
"""
import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("DISTSIMPLEX_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND = _active.BACKEND
STATUS_OPTIMAL = _pykernels.STATUS_OPTIMAL
STATUS_FEASIBLE_FALLBACK = _pykernels.STATUS_FEASIBLE_FALLBACK
STATUS_INFEASIBLE_FALLBACK = _pykernels.STATUS_INFEASIBLE_FALLBACK

pair_h = _active.pair_h
pair_lie = _active.pair_lie
reach_lower_bound = _active.reach_lower_bound
min_pair_distance = _active.min_pair_distance
solve_lp = _active.solve_lp
signed_root = _active.signed_root
