import math

import numpy as np
import pytest

from conftest import dense_principal, l2_normalize
from driftlab.eigen import (
    eigen_sweep,
    extrapolate_limit,
    principal_eigenpair,
)
from driftlab.errors import NonMetzlerError, NotIrreducibleError, ScheduleError
from driftlab.operator import Grid, SparseOperator, assemble
from driftlab.scenario import builtin_scenario, builtin_scenarios, load_scenario


def bare_scenario(dim, b, c, L="0"):
    return load_scenario({
        "name": "raw", "dim": dim, "b": b, "c": c, "L": L, "components": [],
    })


class TestPreconditions:
    def test_non_metzler_rejected(self):
        s = builtin_scenario("stable-point")
        op = assemble(s, Grid(1, 16), 0.01, scheme="centered")
        assert not op.is_metzler
        with pytest.raises(NonMetzlerError):
            principal_eigenpair(op)

    def test_reducible_rejected(self):
        s = bare_scenario(1, ["0"], "0")
        base = assemble(s, Grid(1, 8), 0.1)
        rows = np.arange(base.grid.size)[:, None]
        vals = base.vals.copy()
        vals[base.cols != rows] = 0.0  # decoupled diagonal matrix
        diag = base.diag.copy()
        diag[0] = 3.0
        diag[1:] = 1.0
        vals[base.cols == rows] = diag
        op = SparseOperator(base.grid, base.cols, vals, diag, eps=0.1)
        with pytest.raises(NotIrreducibleError):
            principal_eigenpair(op)


class TestSolvesAgainstDenseOracle:
    def test_zero_field_constant_vector(self):
        s = bare_scenario(1, ["0"], "0")
        op = assemble(s, Grid(1, 32), 0.2)
        pair = principal_eigenpair(op, tol=1e-10)
        assert pair.certified
        assert abs(pair.lam) <= 1e-10
        assert np.max(pair.u) / np.min(pair.u) == pytest.approx(1.0, abs=1e-8)

    def test_matches_dense_on_stable_point(self):
        s = builtin_scenario("stable-point")
        g = Grid(1, 64)
        op = assemble(s, g, 0.05)
        pair = principal_eigenpair(op, tol=1e-12)
        lam_d, v_d, _ = dense_principal(op.to_dense())
        assert pair.lam == pytest.approx(lam_d, abs=1e-8)
        v_d = l2_normalize(v_d, g.h, 1)
        assert np.max(np.abs(pair.u - v_d)) <= 1e-6

    def test_assembly_example_1d(self):
        s = bare_scenario(1, ["-sin(x1)"], "cos(x1)")
        op = assemble(s, Grid(1, 64), 0.1)
        pair = principal_eigenpair(op, tol=1e-12)
        lam_d, _, _ = dense_principal(op.to_dense())
        assert pair.lam == pytest.approx(lam_d, abs=1e-10)

    def test_perron_dominance_small_grids(self):
        for s in builtin_scenarios():
            op = assemble(s, Grid(s.dim, 16), 0.1)
            pair = principal_eigenpair(op, tol=1e-10)
            dense = op.to_dense()
            lam, vecs = np.linalg.eig(dense)
            lead = np.argmax(lam.real)
            assert abs(lam[lead].imag) <= 1e-9, s.name
            gap = np.sort(lam.real)[-1] - np.sort(lam.real)[-2]
            assert gap > 0, s.name
            assert pair.lam == pytest.approx(lam[lead].real, abs=1e-8), s.name
            v = vecs[:, lead].real
            assert np.all(v > 0) or np.all(v < 0), s.name


class TestPairProperties:
    def test_positivity_and_normalization(self):
        s = builtin_scenario("stable-cycle")
        g = Grid(2, 32)
        op = assemble(s, g, 0.1)
        pair = principal_eigenpair(op)
        assert pair.certified
        assert pair.u.min() > 0
        assert abs(np.sum(pair.u**2) * g.h**2 - 1.0) <= 1e-12

    def test_monotone_shift_by_constant(self):
        s = builtin_scenario("stable-cycle")
        op = assemble(s, Grid(2, 32), 0.1)
        pair = principal_eigenpair(op, tol=1e-10)
        s2 = s.with_potential(s.c + 0.7)
        op2 = assemble(s2, Grid(2, 32), 0.1)
        pair2 = principal_eigenpair(op2, tol=1e-10)
        assert pair2.lam - pair.lam == pytest.approx(0.7, abs=1e-10)

    def test_non_convergence_flagged(self):
        s = builtin_scenario("stable-cycle")
        op = assemble(s, Grid(2, 32), 0.05)
        pair = principal_eigenpair(op, max_iter=5)
        assert not pair.certified
        assert pair.iterations == 5


class TestSweep:
    def test_constant_potential_flat_sweep(self):
        s = bare_scenario(1, ["0"], "1.25")
        entries = eigen_sweep(s, 32, [0.2, 0.1, 0.05], tol=1e-10)
        for e in entries:
            assert e.ok
            assert e.lam == pytest.approx(1.25, abs=1e-10)

    def test_warm_start_invariance(self):
        s = builtin_scenario("stable-point")
        warm = eigen_sweep(s, 64, [0.2, 0.1, 0.05], tol=1e-11, warm_start=True)
        cold = eigen_sweep(s, 64, [0.2, 0.1, 0.05], tol=1e-11, warm_start=False)
        for a, b in zip(warm, cold):
            assert a.lam == pytest.approx(b.lam, abs=1e-10)

    def test_schedule_validation(self):
        s = builtin_scenario("stable-point")
        with pytest.raises(ScheduleError):
            eigen_sweep(s, 32, [0.1, 0.2])
        with pytest.raises(ScheduleError):
            eigen_sweep(s, 32, [0.2, -0.1])

    def test_per_entry_error_propagation(self):
        # centered scheme stays Metzler at eps=0.2 on n=16 but loses it at
        # eps=0.1; the sweep must keep the good entry and record the failure
        s = builtin_scenario("stable-point")
        entries = eigen_sweep(s, 16, [0.2, 0.1], scheme="centered")
        assert entries[0].ok
        assert not entries[1].ok
        assert "NonMetzler" in entries[1].error


class TestExtrapolation:
    def test_linear_model(self):
        eps = [0.2, 0.1, 0.05, 0.025]
        data = [(e, 2.0 + 3.0 * e) for e in eps]
        r = extrapolate_limit(data)
        assert r.lambda0 == pytest.approx(2.0, abs=1e-12)
        assert r.p == pytest.approx(1.0, abs=1e-10)

    def test_quadratic_model(self):
        eps = [0.2, 0.1, 0.05, 0.025]
        data = [(e, 1.0 + e**2) for e in eps]
        r = extrapolate_limit(data)
        assert r.lambda0 == pytest.approx(1.0, abs=1e-12)
        assert r.p == pytest.approx(2.0, abs=1e-10)

    def test_non_geometric_rejected(self):
        with pytest.raises(ScheduleError):
            extrapolate_limit([(0.2, 1.0), (0.11, 1.1), (0.05, 1.2)])

    def test_needs_three_points(self):
        with pytest.raises(ScheduleError):
            extrapolate_limit([(0.2, 1.0), (0.1, 1.1)])

    def test_constant_sequence(self):
        r = extrapolate_limit([(0.2, 5.0), (0.1, 5.0), (0.05, 5.0)])
        assert r.lambda0 == 5.0
        assert r.error == 0.0
