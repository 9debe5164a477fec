"""Uniform cell-centered grids and the weighted inner products living on them.

Values of a :class:`GridFunction` are a 2D array of shape ``(nx, ny)``; entry
``[i, j]`` is the sample at the cell center
``(x_min + (i + 1/2) hx, y_min + (j + 1/2) hy)``.  Flattening is C (row-major)
order, so the flat index is ``k = i * ny + j``.

All norms carry quadrature weights: ``hx * hy`` on the grid, user supplied
weights on data vectors.  Discrete norms therefore approximate continuum L2
norms and noise levels can be stated in continuum units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Raised when two fields or data vectors live on incompatible spaces."""


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0

    def __post_init__(self):
        if int(self.nx) < 1 or int(self.ny) < 1:
            raise ValueError(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")
        if not self.x_max > self.x_min or not self.y_max > self.y_min:
            raise ValueError("grid bounds must satisfy x_max > x_min and y_max > y_min")

    @classmethod
    def square(cls, n: int, lo: float = -1.0, hi: float = 1.0) -> "GridSpec":
        return cls(n, n, lo, hi, lo, hi)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def x_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.hx

    def y_centers(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.hy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates as two ``(nx, ny)`` arrays."""
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="ij")

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape))

    def full(self, value: float) -> "GridFunction":
        return GridFunction(self, np.full(self.shape, float(value)))

    def sample(self, func) -> "GridFunction":
        """Evaluate ``func(x, y)`` at the cell centers."""
        X, Y = self.mesh()
        return GridFunction(self, np.broadcast_to(func(X, Y), self.shape).astype(float))


class GridFunction:
    """A scalar field on a :class:`GridSpec`.

    Supports ``+``, ``-``, unary ``-`` and multiplication by scalars.  The
    values array is not copied on construction; callers should not mutate it
    afterwards.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        values = np.asarray(values, dtype=float)
        if values.size != spec.size:
            raise ShapeError(f"expected {spec.size} values for a {spec.nx}x{spec.ny} grid, got {values.size}")
        values = values.reshape(spec.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        self.spec = spec
        self.values = values

    def __repr__(self):
        return f"GridFunction({self.spec.nx}x{self.spec.ny}, norm={norm(self):.6g})"

    def copy(self) -> "GridFunction":
        return GridFunction(self.spec, self.values.copy())

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def _check(self, other):
        if not isinstance(other, GridFunction) or other.spec != self.spec:
            raise ShapeError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.spec, self.values - other.values)

    def __neg__(self):
        return GridFunction(self.spec, -self.values)

    def __mul__(self, alpha):
        return GridFunction(self.spec, float(alpha) * self.values)

    __rmul__ = __mul__


class DataVector:
    """Samples of a measurement together with their quadrature weights."""

    __slots__ = ("values", "weights")

    def __init__(self, values, weights):
        values = np.asarray(values, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if values.shape != weights.shape:
            raise ShapeError(f"{values.size} data values but {weights.size} weights")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("data weights must be finite and nonnegative")
        self.values = values
        self.weights = weights

    def __repr__(self):
        return f"DataVector(n={self.values.size}, norm={data_norm(self):.6g})"

    def __len__(self):
        return self.values.size

    def _check(self, other):
        if not isinstance(other, DataVector) or other.weights.shape != self.weights.shape:
            raise ShapeError("data vectors have different lengths")
        if other.weights is not self.weights and not np.array_equal(other.weights, self.weights):
            raise ShapeError("data vectors carry different quadrature weights")

    def like(self, values) -> "DataVector":
        return DataVector(values, self.weights)

    def __add__(self, other):
        self._check(other)
        return DataVector(self.values + other.values, self.weights)

    def __sub__(self, other):
        self._check(other)
        return DataVector(self.values - other.values, self.weights)

    def __neg__(self):
        return DataVector(-self.values, self.weights)

    def __mul__(self, alpha):
        return DataVector(float(alpha) * self.values, self.weights)

    __rmul__ = __mul__


def inner_product(a: GridFunction, b: GridFunction) -> float:
    """Cell-area weighted L2 pairing ``hx*hy * sum(a*b)``."""
    a._check(b)
    return a.spec.cell_area * float(np.dot(a.values.ravel(), b.values.ravel()))


def norm(a: GridFunction) -> float:
    return float(np.sqrt(max(inner_product(a, a), 0.0)))


def data_inner_product(a: DataVector, b: DataVector) -> float:
    a._check(b)
    return float(np.sum(a.weights * a.values * b.values))


def data_norm(a: DataVector) -> float:
    return float(np.sqrt(max(data_inner_product(a, a), 0.0)))


def lin_comb(alpha: float, a: GridFunction, beta: float, b: GridFunction) -> GridFunction:
    a._check(b)
    return GridFunction(a.spec, alpha * a.values + beta * b.values)
