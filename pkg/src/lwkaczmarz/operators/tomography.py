"""Circular-mean (photoacoustic) and squared-Radon (Schlieren) forward models."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ..grid import DataVector, GridFunction, GridSpec
from .base import ForwardOperator, MatrixOperator, bilinear_matrix
from .pde import helmholtz_operator, helmholtz_solve


def pat_centers(n: int, radius: float = 0.96) -> np.ndarray:
    """Detector points ``R (sin(j pi/N), cos(j pi/N))`` on the right semicircle."""
    j = np.arange(n)
    return radius * np.stack([np.sin(j * np.pi / n), np.cos(j * np.pi / n)], axis=1)


def _support_mask(grid: GridSpec, support_radius):
    if support_radius is None:
        return None
    X, Y = grid.mesh()
    return (X * X + Y * Y <= support_radius**2).ravel().astype(float)


class CircularMeanOp(MatrixOperator):
    """Means of ``f`` over circles centered at one detector point.

    ``(M f)(r_k) = 1/(2 pi) int_{S^1} f(center + r_k sigma) dsigma`` by the
    periodic trapezoidal rule with ``n_angles`` nodes and bilinear
    interpolation.  Radii are midpoints of ``n_radii`` equal bins of
    ``(0, 2R]`` and the data carry weights ``r_k dr`` (the space
    ``L^2([0, 2R], r dr)``).  If ``support_radius`` is given the operator acts
    on ``f`` restricted to that disc.
    """

    def __init__(self, grid: GridSpec, center, R: float = 0.96, n_radii: int | None = None,
                 n_angles: int | None = None, support_radius: float | None = None):
        self.center = np.asarray(center, dtype=float)
        self.R = float(R)
        n_radii = n_radii or max(grid.nx, grid.ny)
        self.n_angles = n_angles or 4 * max(grid.nx, grid.ny)
        dr = 2.0 * self.R / n_radii
        self.radii = (np.arange(n_radii) + 0.5) * dr
        phi = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
        rr, pp = np.meshgrid(self.radii, phi, indexing="ij")
        px = self.center[0] + rr * np.cos(pp)
        py = self.center[1] + rr * np.sin(pp)
        rows = np.repeat(np.arange(n_radii), self.n_angles)
        mat = bilinear_matrix(grid, px, py, weights=1.0 / self.n_angles, rows=rows, n_rows=n_radii)
        mask = _support_mask(grid, support_radius)
        if mask is not None:
            mat = mat @ sp.diags(mask)
        self.support_radius = support_radius
        super().__init__(grid, mat, self.radii * dr, norm_bound=2.0 * math.sqrt(math.pi))

    def analytic_adjoint(self, g_func) -> GridFunction:
        """Continuum adjoint ``g(|x - center|) / (2 pi)`` for the ``r dr`` pairing."""
        X, Y = self.grid.mesh()
        dist = np.hypot(X - self.center[0], Y - self.center[1])
        return GridFunction(self.grid, g_func(dist) / (2.0 * np.pi))


def circular_mean_system(grid: GridSpec, n: int, R: float = 0.96, **kw) -> list[CircularMeanOp]:
    return [CircularMeanOp(grid, c, R, **kw) for c in pat_centers(n, R)]


class RadonOp(MatrixOperator):
    """Line integrals ``int f(s sigma + t sigma_perp) dt`` for one direction.

    ``sigma = (cos theta, sin theta)``.  Offsets are midpoints of ``n_s`` bins
    of ``[-a, a]`` with ``a`` the half-diagonal of the grid box centered at
    the origin (``sqrt 2`` for ``[-1, 1]^2``); data weights are ``ds``.  The
    line integral uses the midpoint rule with step ``min(hx, hy)/2`` unless
    ``step`` is given.
    """

    def __init__(self, grid: GridSpec, angle: float, n_s: int | None = None,
                 step: float | None = None, s_values=None):
        self.angle = float(angle)
        half_diag = math.hypot(max(abs(grid.x_min), abs(grid.x_max)),
                               max(abs(grid.y_min), abs(grid.y_max)))
        if s_values is None:
            n_s = n_s or max(grid.nx, grid.ny)
            ds = 2.0 * half_diag / n_s
            self.s = -half_diag + (np.arange(n_s) + 0.5) * ds
            weights = np.full(n_s, ds)
        else:
            self.s = np.asarray(s_values, dtype=float)
            weights = np.full(self.s.size, 1.0)
        step = step or min(grid.hx, grid.hy) / 2.0
        # the ghost ring extends the support by one cell
        t_max = half_diag + max(grid.hx, grid.hy)
        n_t = int(math.ceil(2.0 * t_max / step))
        dt = 2.0 * t_max / n_t
        t = -t_max + (np.arange(n_t) + 0.5) * dt
        c, s_ = math.cos(self.angle), math.sin(self.angle)
        ss, tt = np.meshgrid(self.s, t, indexing="ij")
        px = ss * c - tt * s_
        py = ss * s_ + tt * c
        rows = np.repeat(np.arange(self.s.size), n_t)
        mat = bilinear_matrix(grid, px, py, weights=dt, rows=rows, n_rows=self.s.size)
        super().__init__(grid, mat, weights)


def semicircle_angles(n: int) -> np.ndarray:
    return np.pi * np.arange(n) / n


class SchlierenOp(ForwardOperator):
    """``F(f) = (R f)^2`` pointwise in ``s``.

    The unknown lives in ``H^1_0``: the pairing on the unknowns is
    ``<a, (I - Delta_h) b>`` and the adjoint of the derivative is
    ``(I - Delta_h)^{-1} R^#(2 w R f)`` with ``R^#`` the L2 transpose.
    """

    linear = False

    def __init__(self, grid: GridSpec, angle: float, n_s: int | None = None,
                 step: float | None = None, eta_bound: float = 0.2, solver: str = "direct"):
        self.radon = RadonOp(grid, angle, n_s=n_s, step=step)
        self.grid = grid
        self.angle = self.radon.angle
        self.data_weights = self.radon.data_weights
        self.eta_bound = eta_bound
        self.norm_bound = None
        self.solver = solver

    def apply(self, f):
        rf = self.radon.apply(f)
        return rf.like(rf.values**2)

    def deriv(self, f, h):
        # d/dt (R(f + t h))^2 = 2 Rf Rh
        return self.data(2.0 * self.radon.apply(f).values * self.radon.apply(h).values)

    def deriv_adjoint(self, f, w: DataVector):
        rf = self.radon.apply(f).values
        back = self.radon.adjoint(self.data(2.0 * w.values * rf))
        return helmholtz_solve(self.grid, back, method=self.solver)

    def x_inner(self, a, b):
        hb = helmholtz_operator(self.grid) @ b.flat()
        return self.grid.cell_area * float(np.dot(a.flat(), hb))


def schlieren_system(grid: GridSpec, n: int, **kw) -> list[SchlierenOp]:
    return [SchlierenOp(grid, th, **kw) for th in semicircle_angles(n)]
