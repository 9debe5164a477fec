"""Build a problem from an :class:`ExperimentSpec`, solve it and write the outputs."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ExperimentSpec
from .grid import GridFunction, GridSpec, norm
from .io import write_pgm, write_report, write_trace_csv
from .operators import EllipticParamOp, circular_mean_system, schlieren_system
from .penalty import PenaltyFunctional
from .phantoms import (NoiseSpec, Phantom, add_noise_all, pat_phantom, pde_coefficient,
                       rasterize, schlieren_phantom, synthesize)
from .solver import Problem, SolveResult, SolverConfig, run

log = logging.getLogger(__name__)

OUTPUT_FILES = ("recon.pgm", "phantom.pgm", "trace.csv", "report.txt", "summary.png")


class ExperimentError(RuntimeError):
    """Failure inside one stage of an experiment (``synthesis``, ``solve`` or ``output``)."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


@dataclass
class RunReport:
    spec: ExperimentSpec
    x: GridFunction
    phantom: GridFunction
    n_delta: int
    status: str
    rel_error: float
    delta: float
    c1: float
    wall_time: float
    residual_sums: list = field(default_factory=list)
    bregman: list = field(default_factory=list)
    inexact_prox: int = 0
    result: SolveResult | None = None

    @property
    def final_residual_sum(self) -> float:
        # R_n of the returned iterate is the sum of the stopping (or last) sweep
        if not self.residual_sums:
            return float("nan")
        return self.residual_sums[min(self.n_delta, len(self.residual_sums) - 1)]

    @property
    def residual_target(self) -> float:
        s = self.spec
        return s.measurements * (s.tau * self.delta) ** 2


def build_operators(spec: ExperimentSpec):
    """Grid, forward operators and default phantom for the configured operator family."""
    if spec.operator == "circular_mean":
        grid = GridSpec.square(spec.grid)
        return grid, circular_mean_system(grid, spec.measurements, spec.radius), pat_phantom()
    if spec.operator == "schlieren":
        grid = GridSpec.square(spec.grid)
        ops = schlieren_system(grid, spec.measurements, eta_bound=spec.eta_value)
        return grid, ops, schlieren_phantom()
    op = EllipticParamOp(spec.grid, eta_bound=spec.eta_value)
    return op.grid, [op], pde_coefficient()


def _elliptic_with_source(spec: ExperimentSpec, c_true: GridFunction) -> EllipticParamOp:
    # source chosen so that u(c_true) = x + y exactly
    X, Y = c_true.spec.mesh()
    src = GridFunction(c_true.spec, c_true.values * (X + Y))
    return EllipticParamOp(spec.grid, source=src, eta_bound=spec.eta_value)


def synthesize_problem(spec: ExperimentSpec):
    """Phantom, operators and noisy data; returns ``(problem, x_true, achieved_delta)``."""
    grid, ops, default_phantom = build_operators(spec)
    phantom = Phantom.parse(spec.phantom) if spec.phantom else default_phantom
    x_true = rasterize(phantom, grid)
    if spec.operator == "elliptic":
        ops = [_elliptic_with_source(spec, x_true)]
    ys = synthesize(ops, x_true)
    level = spec.noise_percent if spec.noise_mode == "relative" else spec.delta
    data, delta = add_noise_all(ys, NoiseSpec(spec.noise_mode, level, spec.seed))
    theta = PenaltyFunctional(spec.penalty, spec.beta, spec.tv_iters, spec.tv_tol)
    problem = Problem(ops, data, theta, grid.full(spec.xi0), x_ref=x_true)
    return problem, x_true, delta


def solver_config(spec: ExperimentSpec, delta: float) -> SolverConfig:
    return SolverConfig(tau=spec.tau, mu0=spec.mu0_value, mu1=spec.mu1, r=spec.r,
                        step_rule=spec.step_rule, stop_rule=spec.stop_rule,
                        max_sweeps=spec.max_sweeps, delta=delta, eta=spec.eta_value)


def run_experiment(spec: ExperimentSpec, out_dir=None) -> RunReport:
    """Synthesize data, run the solver and, if ``out_dir`` is given, write all outputs."""
    t0 = time.perf_counter()
    try:
        problem, x_true, delta = synthesize_problem(spec)
    except Exception as exc:
        raise ExperimentError("synthesis", exc) from exc
    try:
        result = run(problem, solver_config(spec, delta))
    except Exception as exc:
        raise ExperimentError("solve", exc) from exc
    st = result.state
    ref = norm(x_true)
    err = norm(result.x - x_true)
    report = RunReport(
        spec=spec, x=result.x, phantom=x_true, n_delta=result.n_delta, status=result.status,
        rel_error=err / ref if ref > 0 else err, delta=delta, c1=result.c1,
        wall_time=time.perf_counter() - t0, residual_sums=list(st.residual_sums),
        bregman=list(st.bregman), inexact_prox=st.inexact_prox, result=result)
    log.info("%s: %s after %d sweeps, relative error %.4g", spec.preset, report.status,
             report.n_delta, report.rel_error)
    if out_dir is not None:
        try:
            write_outputs(report, out_dir)
        except Exception as exc:
            raise ExperimentError("output", exc) from exc
    return report


def write_outputs(report: RunReport, out_dir, figure: bool = True) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ph = report.phantom.values
    rng = (float(ph.min()), float(ph.max()))
    if not rng[1] > rng[0]:
        rng = None
    write_pgm(report.x, out / "recon.pgm", rng)
    write_pgm(report.phantom, out / "phantom.pgm", rng)
    write_trace_csv(report.result.state, out / "trace.csv")
    write_report(report, out / "report.txt")
    if figure:
        from .plotting import render_summary
        render_summary(report, out / "summary.png")
    return out
