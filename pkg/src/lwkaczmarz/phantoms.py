"""Piecewise-constant phantoms, exact data and the bounded noise model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DataVector, GridFunction, GridSpec, data_norm

SHAPES = ("disc", "ellipse", "rect")


@dataclass(frozen=True)
class Primitive:
    shape: str
    center: tuple
    size: tuple
    value: float

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown primitive {self.shape!r}; expected one of {SHAPES}")
        if any(s <= 0 for s in self.size):
            raise ValueError("primitive sizes must be positive")

    def indicator(self, X, Y):
        dx = X - self.center[0]
        dy = Y - self.center[1]
        if self.shape == "disc":
            return dx * dx + dy * dy <= self.size[0] ** 2
        if self.shape == "ellipse":
            return (dx / self.size[0]) ** 2 + (dy / self.size[1]) ** 2 <= 1.0
        return (np.abs(dx) <= self.size[0]) & (np.abs(dy) <= self.size[1])


def disc(cx, cy, radius, value):
    return Primitive("disc", (cx, cy), (radius,), value)


def ellipse(cx, cy, rx, ry, value):
    return Primitive("ellipse", (cx, cy), (rx, ry), value)


def rect(cx, cy, half_w, half_h, value):
    return Primitive("rect", (cx, cy), (half_w, half_h), value)


@dataclass(frozen=True)
class Phantom:
    primitives: tuple = ()

    def __add__(self, other):
        return Phantom(self.primitives + other.primitives)

    @classmethod
    def parse(cls, text: str) -> "Phantom":
        """Parse ``"disc cx cy r v; ellipse cx cy rx ry v; rect cx cy hw hh v"``."""
        prims = []
        for chunk in text.split(";"):
            parts = chunk.split()
            if not parts:
                continue
            kind, nums = parts[0], parts[1:]
            try:
                vals = [float(v) for v in nums]
            except ValueError as exc:
                raise ValueError(f"bad number in phantom primitive {chunk.strip()!r}") from exc
            arity = {"disc": 4, "ellipse": 5, "rect": 5}
            if kind not in arity:
                raise ValueError(f"unknown primitive {kind!r}; expected one of {SHAPES}")
            if len(vals) != arity[kind]:
                raise ValueError(f"{kind} takes {arity[kind]} numbers, got {len(vals)}")
            prims.append({"disc": disc, "ellipse": ellipse, "rect": rect}[kind](*vals))
        return cls(tuple(prims))

    def describe(self) -> str:
        out = []
        for p in self.primitives:
            nums = " ".join(f"{v:g}" for v in (*p.center, *p.size, p.value))
            out.append(f"{p.shape} {nums}")
        return "; ".join(out)


def rasterize(phantom: Phantom, grid: GridSpec) -> GridFunction:
    """Sum of primitive values at the cell centers."""
    X, Y = grid.mesh()
    vals = np.zeros(grid.shape)
    for p in phantom.primitives:
        vals += p.value * p.indicator(X, Y)
    return GridFunction(grid, vals)


def pat_phantom() -> Phantom:
    """Desk phantom for the circular-mean problem, supported in the disc of radius 0.96."""
    return Phantom((
        disc(-0.30, 0.25, 0.25, 1.0),
        rect(0.25, -0.25, 0.22, 0.12, 0.6),
        disc(0.30, 0.40, 0.12, 0.8),
    ))


def pde_coefficient() -> Phantom:
    """Coefficient of the parameter identification test on the unit square."""
    return Phantom((
        disc(0.65, 0.36, 0.18, 1.0),
        # (x-0.35)^2 + 4 (y-0.75)^2 <= 0.2^2
        ellipse(0.35, 0.75, 0.2, 0.1, 0.5),
    ))


def schlieren_phantom() -> Phantom:
    return Phantom((
        disc(0.0, 0.0, 0.5, 0.5),
        disc(0.2, 0.1, 0.2, 0.5),
        rect(-0.45, -0.45, 0.15, 0.1, 0.4),
    ))


def synthesize(operators, x_true: GridFunction) -> list[DataVector]:
    return [op.apply(x_true) for op in operators]


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform pointwise noise rescaled to an exact weighted norm.

    ``mode`` is ``"absolute"`` (norm ``level``) or ``"relative"`` (norm
    ``level`` percent of the clean data norm).
    """

    mode: str = "relative"
    level: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("absolute", "relative"):
            raise ValueError(f"noise mode must be 'absolute' or 'relative', got {self.mode!r}")
        if self.level < 0:
            raise ValueError("noise level must be >= 0")


def add_noise(y: DataVector, spec: NoiseSpec, index: int = 0) -> tuple[DataVector, float]:
    """Perturb ``y`` by noise of exactly the requested weighted norm.

    Each measurement ``index`` gets its own stream seeded from
    ``(seed, index)``.  Returns the noisy data and the norm actually added.
    """
    target = spec.level if spec.mode == "absolute" else spec.level / 100.0 * data_norm(y)
    if target == 0.0:
        return y.like(y.values.copy()), 0.0
    seed = spec.seed
    while True:
        rng = np.random.default_rng([seed, index])
        e = y.like(rng.uniform(-1.0, 1.0, size=y.values.size))
        en = data_norm(e)
        if en > 0:
            break
        seed += 1
    noisy = y + e * (target / en)
    return noisy, data_norm(noisy - y)


def add_noise_all(ys, spec: NoiseSpec) -> tuple[list[DataVector], float]:
    """Noise for every measurement; the returned level is the largest one added."""
    out, delta = [], 0.0
    for i, y in enumerate(ys):
        yd, d = add_noise(y, spec, i)
        out.append(yd)
        delta = max(delta, d)
    return out, delta
