"""Finite-difference elliptic solves: ``(I - Delta)`` and ``-Delta + c``."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..grid import GridFunction, GridSpec
from .base import ForwardOperator, SolverError

RESIDUAL_RTOL = 1e-10


def _laplacian_1d(n, h):
    return sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)], [-1, 0, 1]) / h**2


@lru_cache(maxsize=16)
def neg_laplacian(grid: GridSpec) -> sp.csr_matrix:
    """5-point ``-Delta_h`` on the grid values with zero values one cell outside."""
    lx = _laplacian_1d(grid.nx, grid.hx)
    ly = _laplacian_1d(grid.ny, grid.hy)
    return (sp.kron(lx, sp.identity(grid.ny)) + sp.kron(sp.identity(grid.nx), ly)).tocsr()


@lru_cache(maxsize=16)
def helmholtz_operator(grid: GridSpec) -> sp.csr_matrix:
    return (sp.identity(grid.size) + neg_laplacian(grid)).tocsr()


@lru_cache(maxsize=16)
def _helmholtz_factor(grid: GridSpec):
    return spla.factorized(helmholtz_operator(grid).tocsc())


def _cg(A, b, rtol, maxiter):
    d = A.diagonal()
    M = sp.diags(1.0 / d)
    x, info = spla.cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M)
    if info > 0:
        raise SolverError(f"conjugate gradients hit the iteration cap ({maxiter})")
    return x


def _check_residual(A, x, b, what):
    bn = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b)
    if res > RESIDUAL_RTOL * max(bn, 1e-300) and res > 0:
        raise SolverError(f"{what}: relative residual {res / bn:.3e} exceeds {RESIDUAL_RTOL:g}")


def helmholtz_solve(grid: GridSpec, rhs: GridFunction, method: str = "direct",
                    maxiter: int = 10000) -> GridFunction:
    """Solve ``(I - Delta_h) u = rhs`` with homogeneous Dirichlet data.

    ``method`` is ``"direct"`` (cached sparse LU, the default) or ``"cg"``
    (Jacobi-preconditioned conjugate gradients).  Either way the residual is
    checked against ``1e-10 ||rhs||``.
    """
    b = rhs.flat()
    if not np.any(b):
        return grid.zeros()
    A = helmholtz_operator(grid)
    if method == "direct":
        u = _helmholtz_factor(grid)(b)
    elif method == "cg":
        u = _cg(A, b, 1e-12, maxiter)
    else:
        raise ValueError(f"unknown solver method {method!r}")
    _check_residual(A, u, b, "Helmholtz solve")
    return GridFunction(grid, u)


def elliptic_grid(n_squares: int) -> GridSpec:
    """Interior nodes of the unit square cut into ``n x n`` squares, as a cell-centered grid."""
    h = 1.0 / n_squares
    return GridSpec(n_squares - 1, n_squares - 1, 0.5 * h, 1.0 - 0.5 * h, 0.5 * h, 1.0 - 0.5 * h)


class EllipticParamOp(ForwardOperator):
    """``c -> u(c)`` for ``-Delta u + c u = f`` in the unit square, ``u = g`` on the boundary.

    Unknowns and data both live on the interior nodes of a uniform mesh; the
    data space is L2 with weight ``h^2``.  The derivative and its adjoint are

        F'(c) h   = -A(c)^{-1} (h u(c))
        F'(c)^* w = -u(c) A(c)^{-1} w

    with ``A(c) = -Delta_h + c`` (symmetric), so the adjoint is exact up to
    the linear solves.
    """

    linear = False
    C_MIN = -0.5

    def __init__(self, n_squares: int = 100, source=None, boundary=None,
                 eta_bound: float = 0.2, method: str = "direct"):
        self.grid = elliptic_grid(n_squares)
        g = self.grid
        self.h = 1.0 / n_squares
        self.boundary = boundary or (lambda x, y: x + y)
        if source is None:
            source = g.zeros()
        elif callable(source):
            source = g.sample(source)
        self.source = source
        self.data_weights = np.full(g.size, g.cell_area)
        self.eta_bound = eta_bound
        self.norm_bound = None
        self.method = method
        self._lap = neg_laplacian(g)
        self._rhs = source.flat() + self._boundary_load()
        self._cache_key = None
        self._cache = None

    def _boundary_load(self):
        g, h = self.grid, self.h
        xs, ys = g.x_centers(), g.y_centers()
        load = np.zeros(g.shape)
        load[0, :] += self.boundary(0.0, ys)
        load[-1, :] += self.boundary(1.0, ys)
        load[:, 0] += self.boundary(xs, 0.0)
        load[:, -1] += self.boundary(xs, 1.0)
        return load.ravel() / h**2

    def _system(self, c: GridFunction):
        key = c.values.tobytes()
        if key == self._cache_key:
            return self._cache
        if c.values.min() < self.C_MIN:
            raise SolverError(f"coefficient below admissibility bound {self.C_MIN}: min c = {c.values.min():.3g}")
        A = (self._lap + sp.diags(c.flat())).tocsc()
        if self.method == "direct":
            try:
                solve = spla.factorized(A)
            except RuntimeError as exc:
                raise SolverError(f"elliptic system is singular: {exc}") from exc
        elif self.method == "cg":
            def solve(b):
                return _cg(A, b, 1e-12, 20000)
        else:
            raise ValueError(f"unknown solver method {self.method!r}")

        def checked(b):
            x = solve(b)
            _check_residual(A, x, b, "elliptic solve")
            return x

        u = checked(self._rhs)
        self._cache_key, self._cache = key, (checked, u)
        return self._cache

    def state(self, c: GridFunction) -> GridFunction:
        return GridFunction(self.grid, self._system(c)[1])

    def apply(self, c):
        return self.data(self._system(c)[1])

    def deriv(self, c, h):
        solve, u = self._system(c)
        b = h.flat() * u
        return self.data(-solve(b) if np.any(b) else np.zeros_like(b))

    def deriv_adjoint(self, c, w):
        solve, u = self._system(c)
        if not np.any(w.values):
            return self.grid.zeros()
        return GridFunction(self.grid, -u * solve(w.values))
