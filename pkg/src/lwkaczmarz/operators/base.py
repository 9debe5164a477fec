from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..grid import DataVector, GridFunction, GridSpec, data_inner_product, inner_product, norm


class SolverError(RuntimeError):
    """A linear solve inside a forward operator failed or lost accuracy."""


class ForwardOperator:
    """One equation ``F(x) = y`` of a system, with derivative and adjoint.

    Subclasses implement :meth:`apply`, :meth:`deriv` and :meth:`deriv_adjoint`.
    The adjoint is taken with respect to :meth:`x_inner` on the unknowns and the
    ``data_weights`` pairing on the data.
    """

    grid: GridSpec
    data_weights: np.ndarray
    eta_bound: float = 0.0
    norm_bound: float | None = None
    linear: bool = False

    def apply(self, x: GridFunction) -> DataVector:
        raise NotImplementedError

    def deriv(self, x: GridFunction, h: GridFunction) -> DataVector:
        raise NotImplementedError

    def deriv_adjoint(self, x: GridFunction, w: DataVector) -> GridFunction:
        raise NotImplementedError

    def x_inner(self, a: GridFunction, b: GridFunction) -> float:
        return inner_product(a, b)

    def data(self, values) -> DataVector:
        return DataVector(values, self.data_weights)

    def __call__(self, x):
        return self.apply(x)


class MatrixOperator(ForwardOperator):
    """Linear operator given by a sparse matrix on flattened grid values.

    The adjoint is the exact transpose with respect to the weighted pairings:
    ``A^* g = A^T (w * g) / (hx hy)``.
    """

    linear = True

    def __init__(self, grid: GridSpec, matrix, data_weights, norm_bound=None):
        self.grid = grid
        self.matrix = sp.csr_matrix(matrix)
        self.data_weights = np.asarray(data_weights, dtype=float)
        self._matrix_t = self.matrix.T.tocsr()
        self.norm_bound = norm_bound
        if self.matrix.shape != (self.data_weights.size, grid.size):
            raise ValueError("matrix shape does not match grid and data sizes")

    def apply(self, x: GridFunction) -> DataVector:
        return self.data(self.matrix @ x.flat())

    def deriv(self, x, h):
        return self.apply(h)

    def adjoint(self, w: DataVector) -> GridFunction:
        if w.values.size != self.data_weights.size:
            raise ValueError(f"expected {self.data_weights.size} data values, got {w.values.size}")
        vals = self._matrix_t @ (self.data_weights * w.values) / self.grid.cell_area
        return GridFunction(self.grid, vals)

    def deriv_adjoint(self, x, w):
        return self.adjoint(w)


class ScaledOperator(ForwardOperator):
    """``factor * op``; used to enforce ``||F'|| <= 1`` for the fixed step rule."""

    def __init__(self, op: ForwardOperator, factor: float):
        self.op = op
        self.factor = float(factor)
        self.grid = op.grid
        self.data_weights = op.data_weights
        self.eta_bound = op.eta_bound
        self.linear = op.linear
        self.norm_bound = None if op.norm_bound is None else abs(self.factor) * op.norm_bound

    def apply(self, x):
        return self.op.apply(x) * self.factor

    def deriv(self, x, h):
        return self.op.deriv(x, h) * self.factor

    def deriv_adjoint(self, x, w):
        return self.op.deriv_adjoint(x, w) * self.factor

    def x_inner(self, a, b):
        return self.op.x_inner(a, b)


def estimate_norm(op: ForwardOperator, x: GridFunction | None = None, iters: int = 200,
                  rtol: float = 1e-10, seed: int = 0) -> float:
    """Power iteration for ``||F'(x)||`` (``x = 0`` by default)."""
    grid = op.grid
    x = grid.zeros() if x is None else x
    rng = np.random.default_rng(seed)
    h = GridFunction(grid, rng.standard_normal(grid.shape))
    h = h * (1.0 / np.sqrt(op.x_inner(h, h)))
    est = 0.0
    for _ in range(iters):
        g = op.deriv_adjoint(x, op.deriv(x, h))
        new = np.sqrt(max(op.x_inner(h, g), 0.0))
        gn = np.sqrt(op.x_inner(g, g))
        if gn == 0.0:
            return 0.0
        h = g * (1.0 / gn)
        if abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return float(est)


def bilinear_matrix(grid: GridSpec, px, py, weights=None, rows=None, n_rows=None):
    """Sparse matrix sampling a grid function at points by bilinear interpolation.

    Values are taken at cell centers and treated as zero beyond the outermost
    centers (one ghost ring of zeros), so interpolated fields have compact
    support.  Point ``m`` contributes ``weights[m]`` times its interpolation
    row to output row ``rows[m]``; by default each point is its own row.
    """
    px = np.asarray(px, dtype=float).ravel()
    py = np.asarray(py, dtype=float).ravel()
    m = px.size
    weights = np.ones(m) if weights is None else np.broadcast_to(np.asarray(weights, float), (m,))
    rows = np.arange(m) if rows is None else np.asarray(rows).ravel()
    n_rows = m if n_rows is None else n_rows
    u = (px - grid.x_min) / grid.hx - 0.5
    v = (py - grid.y_min) / grid.hy - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    all_r, all_c, all_d = [], [], []
    for di, dj in ((0, 0), (1, 0), (0, 1), (1, 1)):
        i = i0 + di
        j = j0 + dj
        wgt = (fu if di else 1.0 - fu) * (fv if dj else 1.0 - fv) * weights
        ok = (i >= 0) & (i < grid.nx) & (j >= 0) & (j < grid.ny) & (wgt != 0.0)
        all_r.append(rows[ok])
        all_c.append(i[ok] * grid.ny + j[ok])
        all_d.append(wgt[ok])
    mat = sp.coo_matrix((np.concatenate(all_d), (np.concatenate(all_r), np.concatenate(all_c))),
                        shape=(n_rows, grid.size))
    return mat.tocsr()


def adjoint_mismatch(op: ForwardOperator, x: GridFunction, h: GridFunction, w: DataVector) -> float:
    """``|<F'(x)h, w> - <h, F'(x)^* w>| / (||h|| ||w||)`` with the operator's pairings."""
    lhs = data_inner_product(op.deriv(x, h), w)
    rhs = op.x_inner(h, op.deriv_adjoint(x, w))
    scale = np.sqrt(op.x_inner(h, h)) * np.sqrt(data_inner_product(w, w))
    return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)


__all__ = [
    "ForwardOperator", "MatrixOperator", "ScaledOperator", "SolverError",
    "adjoint_mismatch", "bilinear_matrix", "estimate_norm", "norm",
]
