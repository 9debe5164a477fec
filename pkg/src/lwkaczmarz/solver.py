"""Landweber iteration of Kaczmarz type with a uniformly convex penalty.

One sweep visits the equations ``F_i(x) = y_i`` in the order ``i = 0..N-1``:

    xi <- xi - mu * F_i'(x)^* J_r(F_i(x) - y_i)
    x  <- argmin_z Theta(z) - <xi, z>

The step ``mu`` is zero whenever the residual is at most ``tau * delta``.
Two step rules are available, ``scaled`` (``mu0 * |res|^(p-r)``) and
``adaptive`` (``min(mu0 |res|^(p(r-1)) / |F'^* J_r res|^p, mu1) * |res|^(p-r)``),
and two stopping rules: ``all_skipped`` stops at the first sweep in which
every step is zero, ``residual_sum`` at the first sweep with
``sum_i |res_i|^p <= N tau^p delta^p``.  In both cases the returned iterate
is the one that entered the stopping sweep.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import DataVector, GridFunction, data_norm, norm
from .operators import ForwardOperator
from .penalty import PenaltyFunctional, bregman_distance, conjugate_minimizer, decrease_constant

log = logging.getLogger(__name__)

STEP_RULES = ("scaled", "adaptive")
STOP_RULES = ("all_skipped", "residual_sum")


class AdmissibilityWarning(UserWarning):
    """The step parameters violate the sufficient condition ``c1 > 0``."""


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 1.2
    mu0: float = 0.1
    mu1: float = 1000.0
    r: float = 2.0
    step_rule: str = "scaled"
    stop_rule: str = "all_skipped"
    max_sweeps: int = 10000
    delta: float = 0.0
    # residuals at or below this are treated as zero when delta = 0
    exact_floor: float = 1e-14
    trust_radius: float | None = None
    # tangential cone constant used only for the c1 diagnostic
    eta: float = 0.0
    warm_start: bool = True
    keep_iterates: bool = False

    def __post_init__(self):
        if not self.tau > 1:
            raise ValueError(f"tau must satisfy tau > 1, got {self.tau}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must satisfy mu0 > 0, got {self.mu0}")
        if not self.mu1 > 0:
            raise ValueError(f"mu1 must satisfy mu1 > 0, got {self.mu1}")
        if not 1 < self.r < math.inf:
            raise ValueError(f"r must lie in (1, inf), got {self.r}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be >= 0")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    @property
    def threshold(self) -> float:
        return self.tau * self.delta if self.delta > 0 else self.exact_floor

    def c1(self, theta: PenaltyFunctional, eta: float | None = None) -> float:
        eta = self.eta if eta is None else eta
        return decrease_constant(theta, self.mu0, self.tau, eta)

    def check_admissible(self, theta: PenaltyFunctional, eta: float | None = None) -> float:
        c1 = self.c1(theta, eta)
        if c1 <= 0:
            warnings.warn(f"step parameters violate c1 > 0 (c1 = {c1:.4g}); "
                          "monotonicity of the Bregman distance is not guaranteed",
                          AdmissibilityWarning, stacklevel=2)
        return c1


@dataclass
class Problem:
    operators: list
    data: list
    penalty: PenaltyFunctional
    xi0: GridFunction
    x_ref: GridFunction | None = None

    def __post_init__(self):
        if len(self.operators) != len(self.data) or not self.operators:
            raise ValueError("need the same positive number of operators and data vectors")

    @property
    def n(self) -> int:
        return len(self.operators)

    @property
    def eta(self) -> float:
        return max(op.eta_bound for op in self.operators)


@dataclass
class StepRecord:
    sweep: int
    i: int
    residual: float
    mu: float
    skipped: bool


@dataclass
class SolverState:
    xi: GridFunction
    x: GridFunction
    sweep: int = 0
    steps: list = field(default_factory=list)
    # per sweep: sum_i |res_i|^p, sum_i mu_i |res_i|^r, Bregman distance at sweep start
    residual_sums: list = field(default_factory=list)
    decrease_sums: list = field(default_factory=list)
    bregman: list = field(default_factory=list)
    iterates: list = field(default_factory=list)
    inexact_prox: int = 0
    dual_hint: object = None


@dataclass
class SolveResult:
    x: GridFunction
    xi: GridFunction
    n_delta: int
    status: str
    state: SolverState
    config: SolverConfig
    c1: float

    @property
    def converged(self) -> bool:
        return self.status == "stopped"


def duality_map(w: DataVector, r: float) -> DataVector:
    """``J_r(w) = |w|^(r-2) w`` in a weighted L2 space (``J_r(0) = 0``)."""
    if r == 2.0:
        return w
    nw = data_norm(w)
    if nw == 0.0:
        return w * 0.0
    return w * nw ** (r - 2.0)


def step_length_scaled(residual_norm, tau_delta, mu0, p=2.0, r=2.0):
    if residual_norm <= tau_delta:
        return 0.0
    return mu0 * residual_norm ** (p - r)


def step_length_adaptive(residual_norm, grad_dual_norm, tau_delta, mu0, mu1, p=2.0, r=2.0):
    if residual_norm <= tau_delta:
        return 0.0
    num = mu0 * residual_norm ** (p * (r - 1.0))
    den = grad_dual_norm**p
    mu_t = mu1 if den == 0.0 or num / den > mu1 else num / den
    return mu_t * residual_norm ** (p - r)


def initial_state(problem: Problem, config: SolverConfig) -> SolverState:
    x, hint = _primal(problem.penalty, problem.xi0, None, config)
    state = SolverState(xi=problem.xi0, x=x, dual_hint=hint)
    return state


def _primal(theta, xi, hint, config):
    x, info = conjugate_minimizer(theta, xi, dual_init=hint if config.warm_start else None,
                                  return_info=True)
    if info is None:
        return x, None
    return x, (info.dual if info.dual is not None else hint, info.converged)


def _in_context(exc, n, i):
    msg = f"sweep {n}, equation {i}: {exc}"
    try:
        return type(exc)(msg)
    except Exception:
        return RuntimeError(msg)


def inner_step(state: SolverState, problem: Problem, config: SolverConfig, i: int) -> SolverState:
    """Kaczmarz sub-step for equation ``i``; updates ``state`` in place and returns it."""
    if not 0 <= i < problem.n:
        raise IndexError(f"equation index {i} outside 0..{problem.n - 1}")
    op: ForwardOperator = problem.operators[i]
    theta = problem.penalty
    p, r = theta.p, config.r
    try:
        res = op.apply(state.x) - problem.data[i]
    except Exception as exc:
        raise _in_context(exc, state.sweep, i) from exc
    res_norm = data_norm(res)
    thr = config.threshold
    if res_norm <= thr:
        state.steps.append(StepRecord(state.sweep, i, res_norm, 0.0, True))
        return state
    try:
        grad = op.deriv_adjoint(state.x, duality_map(res, r))
    except Exception as exc:
        raise _in_context(exc, state.sweep, i) from exc
    if config.step_rule == "scaled":
        mu = step_length_scaled(res_norm, thr, config.mu0, p, r)
    else:
        # gradient norm in the unknowns' own space (H^1_0 for Schlieren)
        g_norm = math.sqrt(max(op.x_inner(grad, grad), 0.0))
        mu = step_length_adaptive(res_norm, g_norm, thr, config.mu0, config.mu1, p, r)
    state.xi = state.xi - grad * mu
    hint = state.dual_hint[0] if state.dual_hint else None
    state.x, new_hint = _primal(theta, state.xi, hint, config)
    if new_hint is not None:
        state.dual_hint = new_hint
        if not new_hint[1]:
            state.inexact_prox += 1
    state.steps.append(StepRecord(state.sweep, i, res_norm, mu, False))
    return state


def sweep(state: SolverState, problem: Problem, config: SolverConfig) -> SolverState:
    """One full pass ``i = 0..N-1``; records the sweep diagnostics."""
    p, r = problem.penalty.p, config.r
    if problem.x_ref is not None:
        state.bregman.append(bregman_distance(problem.penalty, problem.x_ref, state.x, state.xi,
                                              atol=np.inf))
    if config.keep_iterates:
        state.iterates.append((state.xi, state.x))
    start = len(state.steps)
    for i in range(problem.n):
        inner_step(state, problem, config, i)
    recs = state.steps[start:]
    state.residual_sums.append(sum(s.residual**p for s in recs))
    state.decrease_sums.append(sum(s.mu * s.residual**r for s in recs))
    state.sweep += 1
    return state


def run(problem: Problem, config: SolverConfig, state: SolverState | None = None) -> SolveResult:
    """Iterate sweeps until the stopping rule fires or ``max_sweeps`` is reached."""
    c1 = config.c1(problem.penalty, problem.eta)
    if config.step_rule == "scaled":
        config.check_admissible(problem.penalty, problem.eta)
    state = initial_state(problem, config) if state is None else state
    x_start = state.x
    n = problem.n
    p = problem.penalty.p
    thr = config.threshold
    while state.sweep < config.max_sweeps:
        before = (state.xi, state.x, state.dual_hint)
        sweep(state, problem, config)
        recs = state.steps[-n:]
        if config.stop_rule == "all_skipped":
            stop = all(s.skipped for s in recs)
        else:
            stop = state.residual_sums[-1] <= n * thr**p
        if stop:
            state.xi, state.x, state.dual_hint = before
            n_delta = state.sweep - 1
            log.info("stopped at sweep %d", n_delta)
            return _result(problem, state, config, n_delta, "stopped", c1, x_start)
    log.warning("sweep budget of %d exhausted before the stopping rule fired", config.max_sweeps)
    if problem.x_ref is not None:
        state.bregman.append(bregman_distance(problem.penalty, problem.x_ref, state.x, state.xi,
                                              atol=np.inf))
    if config.keep_iterates:
        state.iterates.append((state.xi, state.x))
    return _result(problem, state, config, state.sweep, "budget-exhausted", c1, x_start)


def _result(problem, state, config, n_delta, status, c1, x_start):
    if config.trust_radius is not None:
        dist = norm(state.x - x_start)
        if dist > config.trust_radius:
            log.warning("final iterate left the trust region: |x - x0| = %.4g > %.4g",
                        dist, config.trust_radius)
    return SolveResult(state.x, state.xi, n_delta, status, state, config, c1)


@dataclass
class MonotonicityReport:
    """Per-sweep Bregman decrease against the guaranteed lower bound."""

    decreases: list
    bounds: list
    violations: list
    c1: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self):
        for k, (d, b) in enumerate(zip(self.decreases, self.bounds)):
            flag = "VIOLATION" if k in self.violations else "ok"
            yield f"sweep {k}: decrease {d:.6e} bound {b:.6e} {flag}"


def verify_monotonicity(result: SolveResult, theta: PenaltyFunctional, x_ref: GridFunction,
                        c1: float | None = None, atol: float = 1e-10) -> MonotonicityReport:
    """Check ``D_n - D_{n+1} >= c1 sum_i mu_{n,i} |res_{n,i}|^r`` on a finished run.

    Bregman distances are recomputed from stored iterates when the run kept
    them (``keep_iterates``), otherwise taken from the run's own trace.  A
    violation is any sweep whose decrease falls short of the bound (or of
    zero) by more than ``atol``.
    """
    state = result.state
    c1 = result.c1 if c1 is None else c1
    if state.iterates:
        ds = [bregman_distance(theta, x_ref, x, xi, atol=np.inf) for xi, x in state.iterates]
    else:
        ds = list(state.bregman)
    n_pairs = min(len(ds) - 1, len(state.decrease_sums))
    decreases, bounds, violations = [], [], []
    for k in range(max(n_pairs, 0)):
        dec = ds[k] - ds[k + 1]
        bound = c1 * state.decrease_sums[k]
        decreases.append(dec)
        bounds.append(bound)
        if dec < -atol or dec < bound - atol:
            violations.append(k)
    return MonotonicityReport(decreases, bounds, violations, c1)


def stopping_bound(theta: PenaltyFunctional, x_ref: GridFunction, xi0: GridFunction,
                   config: SolverConfig, c1: float) -> float:
    """Upper bound ``D_{xi0}(x_ref, x0) / (c1 mu0 tau^p delta^p) + 1`` on the stopping sweep."""
    x0 = conjugate_minimizer(theta, xi0)
    d0 = bregman_distance(theta, x_ref, x0, xi0, atol=np.inf)
    p = theta.p
    return d0 / (c1 * config.mu0 * (config.tau * config.delta) ** p) + 1.0
