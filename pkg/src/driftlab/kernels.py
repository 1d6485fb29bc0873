"""Hot numerical kernels with a JIT path and a pure-numpy twin.

The sparse operator is stored in uniform-slot form: every row has exactly K
column/value slots (K = 2*dim + 1), sorted by ascending column index. The
mat-vec accumulates each row's slots in that fixed order, which makes the
result bitwise independent of the number of worker threads and identical
between the compiled and the numpy implementations.

Set DRIFTLAB_NUMBA=0 to force the numpy path; without numba installed the
fallback is automatic.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "HAVE_NUMBA",
    "numba_enabled",
    "matvec",
    "matvec_numpy",
    "set_threads",
    "active_backend",
]

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via DRIFTLAB_NUMBA=0
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

    prange = range


def numba_enabled():
    if not HAVE_NUMBA:
        return False
    return os.environ.get("DRIFTLAB_NUMBA", "1") != "0"


@njit(parallel=True, cache=True)
def _matvec_jit(cols, vals, x, out):  # pragma: no cover - compiled
    nrows = cols.shape[0]
    K = cols.shape[1]
    for r in prange(nrows):
        acc = 0.0
        for j in range(K):
            acc += vals[r, j] * x[cols[r, j]]
        out[r] = acc


def matvec_numpy(cols, vals, x, out):
    """Slot-ordered accumulation; bitwise-identical to the compiled row loop."""
    np.multiply(vals[:, 0], x[cols[:, 0]], out=out)
    for j in range(1, cols.shape[1]):
        out += vals[:, j] * x[cols[:, j]]
    return out


def matvec(cols, vals, x, out):
    """Apply the slot-form sparse matrix: out[r] = sum_j vals[r,j]*x[cols[r,j]]."""
    if numba_enabled():
        _matvec_jit(cols, vals, x, out)
        return out
    return matvec_numpy(cols, vals, x, out)


def set_threads(workers):
    """Clamp and apply a worker count for the compiled path.

    Results do not depend on the count; this only affects speed. Returns the
    number actually in effect.
    """
    if workers is None or not numba_enabled():
        return 1
    limit = numba.config.NUMBA_NUM_THREADS
    k = max(1, min(int(workers), limit))
    numba.set_num_threads(k)
    return k


def active_backend():
    return "numba" if numba_enabled() else "numpy"
