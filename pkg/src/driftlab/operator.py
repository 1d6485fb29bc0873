"""Finite-difference assembly of eps*Lap + b.grad + c on uniform periodic grids.

The operator is stored in uniform-slot form: K = 2*dim + 1 column/value slots
per row, sorted by ascending column, so the mat-vec has a fixed per-row
summation order (see kernels). Upwind advection keeps every off-diagonal
entry nonnegative for any eps and h, which is what gives the discrete
operator a real simple leading eigenvalue with a positive eigenvector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GridTooLargeError

TWO_PI = 2.0 * math.pi

# refuse grids with more rows than this without an explicit override
MAX_GRID_SIZE = 2**24

__all__ = ["Grid", "SparseOperator", "assemble", "assemble_gauged", "apply"]


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.n < 8:
            raise ValueError("need at least 8 points per axis")

    @property
    def h(self):
        return TWO_PI / self.n

    @property
    def size(self):
        return self.n**self.dim

    def axis(self):
        return TWO_PI * np.arange(self.n) / self.n

    def coord_arrays(self):
        """dim arrays of length size: coordinates of every grid point, row-major."""
        mesh = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return [m.ravel() for m in mesh]

    def points(self):
        return np.stack(self.coord_arrays(), axis=1)

    def flat_index(self, multi):
        return int(np.ravel_multi_index([m % self.n for m in multi], (self.n,) * self.dim))


class SparseOperator:
    """Uniform-slot sparse matrix with assembly metadata."""

    def __init__(self, grid, cols, vals, diag, *, eps, scenario="", scheme="upwind",
                 gauged=False):
        self.grid = grid
        self.cols = cols
        self.vals = vals
        self.diag = diag
        self.eps = eps
        self.scenario = scenario
        self.scheme = scheme
        self.gauged = gauged
        rows = np.arange(grid.size)[:, None]
        off = self.vals[self.cols != rows]
        self.min_offdiag = float(off.min()) if off.size else 0.0

    @property
    def shape(self):
        return (self.grid.size, self.grid.size)

    @property
    def is_metzler(self):
        return self.min_offdiag >= 0.0

    @property
    def is_irreducible(self):
        # strictly positive couplings to all 2*dim periodic neighbors make the
        # stencil graph strongly connected; weaker cases are not certified
        return self.min_offdiag > 0.0

    def apply(self, x, out=None):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.grid.size,):
            raise ValueError("vector length %d, expected %d" % (x.size, self.grid.size))
        if out is None:
            out = np.empty_like(x)
        return kernels.matvec(self.cols, self.vals, x, out)

    def to_dense(self):
        n = self.grid.size
        dense = np.zeros((n, n))
        dense[np.arange(n)[:, None], self.cols] = self.vals
        return dense

    def dump(self, fh):
        """Debug text form: one "row col value" triplet per line, row-major,
        ascending column within each row."""
        for r in range(self.grid.size):
            for j in range(self.cols.shape[1]):
                fh.write("%d %d %.17g\n" % (r, self.cols[r, j], self.vals[r, j]))

    def meta(self):
        return {
            "n": self.grid.n,
            "dim": self.grid.dim,
            "eps": self.eps,
            "scenario": self.scenario,
            "scheme": self.scheme,
            "gauged": self.gauged,
            "min_offdiag": self.min_offdiag,
        }


def apply(op, x, out=None):
    return op.apply(x, out=out)


def _neighbor_indices(grid):
    idx = np.arange(grid.size).reshape((grid.n,) * grid.dim)
    pairs = []
    for a in range(grid.dim):
        ip = np.roll(idx, -1, axis=a).ravel()  # index of x + h*e_a
        im = np.roll(idx, +1, axis=a).ravel()  # index of x - h*e_a
        pairs.append((ip, im))
    return pairs


def _assemble_core(grid, diffusion, drift_vals, pot_vals, scheme):
    """A = diffusion*D2 + U(drift)*D1 + diag(pot) in slot form."""
    if scheme not in ("upwind", "centered"):
        raise ValueError("scheme must be 'upwind' or 'centered'")
    h = grid.h
    lap = diffusion / (h * h)
    size = grid.size
    cols = [np.arange(size)]
    vals = []
    diag = np.full(size, -2.0 * grid.dim * lap) + pot_vals
    for a, (ip, im) in enumerate(_neighbor_indices(grid)):
        ba = drift_vals[a]
        if scheme == "upwind":
            bp = np.maximum(ba, 0.0)
            bm = np.maximum(-ba, 0.0)
            vals.append(lap + bp / h)
            vals.append(lap + bm / h)
            diag -= (bp + bm) / h
        else:
            vals.append(lap + ba / (2.0 * h))
            vals.append(lap - ba / (2.0 * h))
        cols.append(ip)
        cols.append(im)
    cols = np.stack(cols, axis=1)
    vals = np.stack([diag] + vals, axis=1)
    order = np.argsort(cols, axis=1, kind="stable")
    cols = np.take_along_axis(cols, order, axis=1)
    vals = np.take_along_axis(vals, order, axis=1)
    return cols, vals, diag


def _check_size(grid, allow_large):
    if grid.size > MAX_GRID_SIZE and not allow_large:
        raise GridTooLargeError(
            "grid has %d rows (> %d); pass the override to proceed"
            % (grid.size, MAX_GRID_SIZE)
        )


def assemble(scenario, grid, eps, scheme="upwind", allow_large=False):
    """Discrete eps*Lap + b.grad + c with the requested advection scheme."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if grid.dim != scenario.dim:
        raise ValueError("grid dim %d != scenario dim %d" % (grid.dim, scenario.dim))
    _check_size(grid, allow_large)
    coords = grid.coord_arrays()
    drift = [np.asarray(scenario.b[i](*coords), dtype=float) for i in range(grid.dim)]
    pot = np.asarray(scenario.c(*coords), dtype=float)
    cols, vals, diag = _assemble_core(grid, eps, drift, pot, scheme)
    return SparseOperator(grid, cols, vals, diag, eps=eps,
                          scenario=scenario.name, scheme=scheme)


def assemble_gauged(scenario, grid, eps, scheme="upwind", allow_large=False):
    """Transformed operator eps^2*Lap + eps*(Omega,grad) + c_eps with
    Omega = b + grad L and c_eps = eps*(c + Lap L/2) + Psi_L,
    Psi_L = (|grad L|^2 + 2*(grad L, b))/4.

    Conjugation identity: exp(-L/2eps) * eps*(eps*Lap + b.grad + c) applied to
    exp(L/2eps)*w equals this operator applied to w, for smooth w.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if grid.dim != scenario.dim:
        raise ValueError("grid dim %d != scenario dim %d" % (grid.dim, scenario.dim))
    _check_size(grid, allow_large)
    coords = grid.coord_arrays()
    d = grid.dim
    b = [np.asarray(scenario.b[i](*coords), dtype=float) for i in range(d)]
    gL = [np.asarray(scenario.grad_L[i](*coords), dtype=float) for i in range(d)]
    drift = [eps * (b[i] + gL[i]) for i in range(d)]
    psi = 0.25 * sum(gL[i] * gL[i] + 2.0 * gL[i] * b[i] for i in range(d))
    pot = eps * (np.asarray(scenario.c(*coords), dtype=float)
                 + 0.5 * np.asarray(scenario.lap_L(*coords), dtype=float)) + psi
    cols, vals, diag = _assemble_core(grid, eps * eps, drift, pot, scheme)
    return SparseOperator(grid, cols, vals, diag, eps=eps,
                          scenario=scenario.name, scheme=scheme, gauged=True)


def gauge_weight(scenario, grid, eps):
    """Samples of Psi_L = (|grad L|^2 + 2(grad L, b))/4 on the grid."""
    coords = grid.coord_arrays()
    d = grid.dim
    b = [np.asarray(scenario.b[i](*coords), dtype=float) for i in range(d)]
    gL = [np.asarray(scenario.grad_L[i](*coords), dtype=float) for i in range(d)]
    return 0.25 * sum(gL[i] * gL[i] + 2.0 * gL[i] * b[i] for i in range(d))
