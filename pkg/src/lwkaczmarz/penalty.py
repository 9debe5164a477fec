"""2-convex penalty functionals on grid functions.

Three kinds share the quadratic term ``1/(2 beta) ||x||^2``:

* ``Quadratic``: nothing else; ``beta = 1/2`` gives ``Theta(x) = ||x||^2``.
* ``L1L2``: adds ``||x||_1`` (sparsity).
* ``TVL2``: adds the isotropic total variation.

Each is 2-convex with constant ``c0 = 1/(2 beta)``, i.e.
``D_xi(z, x) >= c0 ||z - x||^2``.  The map ``xi -> argmin_z Theta(z) - <xi, z>``
(the gradient of the conjugate functional) turns dual iterates into primal
ones; it is closed form for the first two kinds and a TV prox for the third.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, inner_product
from .tvprox import tv_prox, tv_value

log = logging.getLogger(__name__)

KINDS = ("quad", "l1l2", "tvl2")


class BregmanConsistencyError(ArithmeticError):
    """A Bregman distance came out negative: (x, xi) is not a subgradient pair."""


@dataclass(frozen=True)
class PenaltyFunctional:
    """Parameters of one penalty.  ``kind`` is one of ``quad``, ``l1l2``, ``tvl2``."""

    kind: str
    beta: float = 1.0
    tv_iters: int = 100
    tv_tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}; expected one of {KINDS}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.tv_iters < 1:
            raise ValueError("tv_iters must be >= 1")
        if not self.tv_tol > 0:
            raise ValueError("tv_tol must be positive")

    @classmethod
    def quadratic(cls, beta=0.5):
        return cls("quad", beta)

    @classmethod
    def l1l2(cls, beta=1.0):
        return cls("l1l2", beta)

    @classmethod
    def tvl2(cls, beta=1.0, tv_iters=100, tv_tol=1e-6):
        return cls("tvl2", beta, tv_iters, tv_tol)

    @property
    def p(self) -> float:
        return 2.0

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def c0(self) -> float:
        return 1.0 / (2.0 * self.beta)


def value(theta: PenaltyFunctional, x: GridFunction) -> float:
    v = inner_product(x, x) / (2.0 * theta.beta)
    if theta.kind == "l1l2":
        v += x.spec.cell_area * float(np.sum(np.abs(x.values)))
    elif theta.kind == "tvl2":
        v += tv_value(x)
    return v


def soft_threshold(xi: GridFunction, beta: float) -> GridFunction:
    """Pointwise minimizer of ``t^2/(2 beta) + |t| - xi t``."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    a = xi.values
    return GridFunction(xi.spec, beta * np.sign(a) * np.maximum(np.abs(a) - 1.0, 0.0))


def conjugate_minimizer(theta: PenaltyFunctional, xi: GridFunction, *,
                        dual_init=None, return_info: bool = False):
    """``argmin_z Theta(z) - <xi, z>``.

    For ``tvl2`` the problem equals ``argmin_z 1/2 ||z - beta xi||^2 + beta TV(z)``
    up to a constant, so it is one TV prox.  An inexact prox (budget exhausted
    before ``tv_tol``) is logged and reported through ``return_info``; the best
    iterate is returned either way.  ``dual_init`` warm-starts the TV solver.
    """
    info = None
    if theta.kind == "quad":
        x = xi * theta.beta
    elif theta.kind == "l1l2":
        x = soft_threshold(xi, theta.beta)
    else:
        x, info = tv_prox(xi * theta.beta, theta.beta, theta.tv_iters, theta.tv_tol,
                          dual_init=dual_init, return_info=True)
        if not info.converged:
            log.debug("prox-inexact: TV prox stopped after %d iterations, gap %.3g",
                      info.iterations, info.gap)
    if return_info:
        return x, info
    return x


def bregman_distance(theta: PenaltyFunctional, z: GridFunction, x: GridFunction,
                     xi: GridFunction, *, atol: float = 1e-10) -> float:
    """``Theta(z) - Theta(x) - <xi, z - x>`` for a subgradient ``xi`` of Theta at ``x``."""
    d = value(theta, z) - value(theta, x) - inner_product(xi, z - x)
    if d < -atol:
        raise BregmanConsistencyError(f"negative Bregman distance {d:.3e}")
    return d


def decrease_constant(theta: PenaltyFunctional, mu0: float, tau: float, eta: float = 0.0) -> float:
    """The constant ``c1 = 1 - eta - (1+eta)/tau - (p-1)/p (mu0/(2 c0))^(1/(p-1))``.

    Positive values admit ``(tau, mu0)`` for the fixed step rule; with exact
    data pass ``tau=inf`` to drop the noise term.
    """
    p = theta.p
    return 1.0 - eta - (1.0 + eta) / tau - (p - 1.0) / p * (mu0 / (2.0 * theta.c0)) ** (1.0 / (p - 1.0))
