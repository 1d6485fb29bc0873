import os
import subprocess
import sys

import numpy as np

from driftlab import kernels
from driftlab.eigen import principal_eigenpair
from driftlab.operator import Grid, assemble
from driftlab.scenario import builtin_scenario


def random_slot_matrix(rng, nrows=4096, K=5):
    cols = np.empty((nrows, K), dtype=np.int64)
    for r in range(nrows):
        cols[r] = np.sort(rng.choice(nrows, size=K, replace=False))
    vals = rng.standard_normal((nrows, K))
    return cols, vals


class TestBackendEquivalence:
    def test_numpy_twin_is_bitwise_identical(self):
        rng = np.random.default_rng(100)
        cols, vals = random_slot_matrix(rng)
        x = rng.standard_normal(cols.shape[0])
        a = np.empty_like(x)
        b = np.empty_like(x)
        kernels.matvec_numpy(cols, vals, x, a)
        if kernels.HAVE_NUMBA:
            kernels._matvec_jit(cols, vals, x, b)
            np.testing.assert_array_equal(a, b)

    def test_thread_count_does_not_change_bits(self):
        if not kernels.numba_enabled():
            return
        rng = np.random.default_rng(101)
        cols, vals = random_slot_matrix(rng, nrows=8192)
        x = rng.standard_normal(cols.shape[0])
        outs = []
        for workers in (1, 2, 4):
            kernels.set_threads(workers)
            out = np.empty_like(x)
            kernels._matvec_jit(cols, vals, x, out)
            outs.append(out)
        kernels.set_threads(1)
        np.testing.assert_array_equal(outs[0], outs[1])
        np.testing.assert_array_equal(outs[0], outs[2])

    def test_dispatch_respects_env_flag(self, monkeypatch):
        monkeypatch.setenv("DRIFTLAB_NUMBA", "0")
        assert kernels.active_backend() == "numpy"
        monkeypatch.delenv("DRIFTLAB_NUMBA")
        if kernels.HAVE_NUMBA:
            assert kernels.active_backend() == "numba"

    def test_set_threads_clamps(self):
        got = kernels.set_threads(10**6)
        assert got >= 1
        assert kernels.set_threads(None) == 1


class TestSolverUnderBothBackends:
    def test_eigenvalue_bitwise_equal_across_backends(self):
        # the full solve (assembly + iteration) must agree bitwise between
        # the compiled and numpy paths; run the numpy path in a subprocess
        # with the env flag so the in-process backend stays untouched
        code = (
            "import numpy as np\n"
            "from driftlab.operator import Grid, assemble\n"
            "from driftlab.eigen import principal_eigenpair\n"
            "from driftlab.scenario import builtin_scenario\n"
            "s = builtin_scenario('stable-cycle')\n"
            "op = assemble(s, Grid(2, 32), 0.1)\n"
            "p = principal_eigenpair(op, tol=1e-10)\n"
            "print(repr(p.lam), repr(float(np.sum(p.u))))\n"
        )
        env = dict(os.environ)
        outs = {}
        for flag in ("0", "1"):
            env["DRIFTLAB_NUMBA"] = flag
            r = subprocess.run([sys.executable, "-c", code], env=env,
                               capture_output=True, text=True, check=True)
            outs[flag] = r.stdout.strip()
        assert outs["0"] == outs["1"]

    def test_solve_in_process(self):
        s = builtin_scenario("stable-cycle")
        op = assemble(s, Grid(2, 16), 0.2)
        pair = principal_eigenpair(op)
        assert pair.certified
