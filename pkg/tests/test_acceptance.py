"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math

import numpy as np
import pytest

from lwkaczmarz.config import parse_config_text, preset
from lwkaczmarz.experiment import run_experiment, write_outputs
from lwkaczmarz.grid import GridFunction, GridSpec, data_norm, norm
from lwkaczmarz.operators import (CircularMeanOp, EllipticParamOp, RadonOp, SchlierenOp,
                                  adjoint_mismatch, circular_mean_system, estimate_norm)
from lwkaczmarz.penalty import PenaltyFunctional, bregman_distance, soft_threshold
from lwkaczmarz.phantoms import (NoiseSpec, add_noise_all, pat_phantom, pde_coefficient, rasterize,
                                 schlieren_phantom, synthesize)
from lwkaczmarz.solver import Problem, SolverConfig, run, stopping_bound, verify_monotonicity
from lwkaczmarz.tvprox import tv_prox

from oracles import fd_slope, soft_threshold_grid, tv1d_brute_force

TAU = 1.2


def toy_config(theta, **kw):
    return SolverConfig(tau=TAU, mu0=(1 - 1 / TAU) / theta.beta, **kw)


def test_c01_adjoint_exactness(acceptance_line):
    rng = np.random.default_rng(101)
    g = GridSpec.square(32)
    worst = {}

    def rand(spec):
        return GridFunction(spec, rng.standard_normal(spec.shape))

    centers = [(0.96 * math.cos(a), 0.96 * math.sin(a)) for a in rng.uniform(0, 2 * math.pi, 5)]
    cms = [CircularMeanOp(g, c) for c in centers]
    worst["circular_mean"] = max(
        adjoint_mismatch(op, g.zeros(), rand(g), op.data(rng.standard_normal(len(op.data_weights))))
        for k in range(100) for op in [cms[k % 5]])
    vals = []
    for _ in range(100):
        op = RadonOp(g, rng.uniform(0, math.pi))
        vals.append(adjoint_mismatch(op, g.zeros(), rand(g),
                                     op.data(rng.standard_normal(len(op.data_weights)))))
    worst["radon"] = max(vals)
    vals = []
    for _ in range(100):
        op = SchlierenOp(g, rng.uniform(0, math.pi))
        vals.append(adjoint_mismatch(op, rand(g), rand(g),
                                     op.data(rng.standard_normal(len(op.data_weights)))))
    worst["schlieren"] = max(vals)
    vals = []
    op = EllipticParamOp(12)
    for _ in range(100):
        c = GridFunction(op.grid, rng.uniform(0.0, 2.0, op.grid.shape))
        vals.append(adjoint_mismatch(op, c, rand(op.grid),
                                     op.data(rng.standard_normal(op.grid.size))))
    worst["elliptic"] = max(vals)
    limits = {"circular_mean": 1e-10, "radon": 1e-10, "schlieren": 1e-8, "elliptic": 1e-8}
    ok = all(worst[k] <= limits[k] for k in limits)
    acceptance_line(1, ok, "adjoint mismatch " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_c02_derivative_order(acceptance_line):
    ts = [1e-2, 1e-3, 1e-4, 1e-5]

    def taylor_errors(op, x, h):
        fx, d = op.apply(x), op.deriv(x, h)
        return [data_norm(op.apply(x + h * t) - fx - d * t) for t in ts]

    op = EllipticParamOp(16)
    c = op.grid.sample(lambda x, y: 1 + 0.5 * np.sin(3 * x) * np.cos(2 * y))
    h = op.grid.sample(lambda x, y: 5 * (1 + np.sin(4 * x + y)))
    s_ell = fd_slope(ts, taylor_errors(op, c, h))
    g = GridSpec.square(32)
    sch = SchlierenOp(g, 0.7)
    f = rasterize(schlieren_phantom(), g)
    hs = GridFunction(g, np.random.default_rng(2).standard_normal(g.shape))
    s_sch = fd_slope(ts, taylor_errors(sch, f, hs))
    ok = abs(s_ell - 2.0) <= 0.1 and abs(s_sch - 2.0) <= 0.1
    acceptance_line(2, ok, f"log-log slopes elliptic {s_ell:.4f}, schlieren {s_sch:.4f}")


def test_c03_soft_threshold(acceptance_line):
    rng = np.random.default_rng(303)
    xi = rng.uniform(-4, 4, 1000)
    beta = rng.uniform(0.1, 2.0, 1000)
    g = GridSpec(1, 1)
    closed = np.array([soft_threshold(GridFunction(g, [[a]]), b).values[0, 0] for a, b in zip(xi, beta)])
    err = float(np.max(np.abs(closed - soft_threshold_grid(xi, beta))))

    def st(a, b):
        return soft_threshold(GridFunction(g, [[a]]), b).values[0, 0]

    branches = tuple(bool(b) for b in (st(2.0, 1.0) == 1.0, st(-3.0, 2.0) == -4.0, st(1.0, 1.0) == 0.0))
    acceptance_line(3, err <= 2e-4 and all(branches),
                    f"max deviation from grid oracle {err:.2e}; branch examples {branches}")


def test_c04_tv_prox_oracle(acceptance_line):
    rng = np.random.default_rng(404)
    worst_1d = 0.0
    for n in (2, 3, 4):
        for _ in range(3):
            v = rng.uniform(-3, 3, n)
            lam = rng.uniform(0.05, 2.0)
            line = GridFunction(GridSpec(1, n, 0.0, 1.0, 0.0, float(n)), v)
            z = tv_prox(line, lam, max_iters=2000, tol=1e-10).values.ravel()
            worst_1d = max(worst_1d, float(np.max(np.abs(z - tv1d_brute_force(v, lam)))))
    g = GridSpec.square(24)
    worst_shift = worst_scale = 0.0
    for _ in range(5):
        v = GridFunction(g, rng.standard_normal(g.shape))
        lam, c, alpha = rng.uniform(0.01, 0.5), rng.uniform(-5, 5), rng.uniform(0.2, 5.0)
        z = tv_prox(v, lam)
        worst_shift = max(worst_shift, float(np.max(np.abs(tv_prox(v + g.full(c), lam).values - c - z.values))))
        worst_scale = max(worst_scale, float(np.max(np.abs(tv_prox(v * alpha, alpha * lam).values
                                                           - alpha * z.values))) / max(1.0, alpha))
    ok = worst_1d <= 5e-3 and worst_shift <= 1e-6 and worst_scale <= 1e-6
    acceptance_line(4, ok, f"1D oracle {worst_1d:.1e}, shift {worst_shift:.1e}, scale {worst_scale:.1e}")


def test_c05_bregman_monotonicity(toy_system, acceptance_line):
    g, ops, x_true, ys = toy_system
    details, ok = [], True
    for theta in (PenaltyFunctional.quadratic(0.5), PenaltyFunctional.l1l2(1.0),
                  PenaltyFunctional.tvl2(1.0)):
        res = run(Problem(ops, ys, theta, g.zeros(), x_true), toy_config(theta, max_sweeps=40))
        rep = verify_monotonicity(res, theta, x_true, atol=1e-10)
        nonincreasing = bool(np.all(np.diff(res.state.bregman) <= 1e-10))
        ok &= rep.ok and nonincreasing and len(rep.decreases) == 40 and rep.c1 > 0
        details.append(f"{theta.kind} {len(rep.violations)} violations")
    acceptance_line(5, ok, "40 sweeps exact data: " + ", ".join(details))


def test_c06_finite_stopping(toy_system, acceptance_line):
    g, ops, x_true, ys = toy_system
    details, ok = [], True
    cases = [(PenaltyFunctional.quadratic(0.5), 2.0), (PenaltyFunctional.l1l2(1.0), 2.0),
             (PenaltyFunctional.tvl2(1.0, tv_iters=10), 4.0)]
    for theta, level in cases:
        noisy, delta = add_noise_all(ys, NoiseSpec("relative", level, 0))
        cfg = toy_config(theta, delta=delta, max_sweeps=20000, stop_rule="all_skipped")
        res = run(Problem(ops, noisy, theta, g.zeros(), x_true), cfg)
        bound = stopping_bound(theta, x_true, g.zeros(), cfg, res.c1)
        final = [s for s in res.state.steps if s.sweep == res.n_delta]
        recomputed = [data_norm(op.apply(res.x) - y) for op, y in zip(ops, noisy)]
        good = (res.converged and res.n_delta <= bound and len(final) == len(ops)
                and all(s.skipped and s.residual <= TAU * delta for s in final)
                and max(recomputed) <= TAU * delta)
        ok &= good
        details.append(f"{theta.kind} n={res.n_delta} bound={bound:.3g}")
    acceptance_line(6, ok, "; ".join(details))


def test_c07_regularization_trend(toy_system, acceptance_line):
    g, ops, x_true, ys = toy_system
    details, ok = [], True
    for theta in (PenaltyFunctional.quadratic(0.5), PenaltyFunctional.l1l2(1.0)):
        medians = []
        for level in (4.0, 2.0, 1.0):
            finals = []
            for seed in range(5):
                noisy, delta = add_noise_all(ys, NoiseSpec("relative", level, seed))
                res = run(Problem(ops, noisy, theta, g.zeros(), x_true),
                          toy_config(theta, delta=delta, max_sweeps=20000))
                assert res.converged
                finals.append(bregman_distance(theta, x_true, res.x, res.xi))
            medians.append(float(np.median(finals)))
        ok &= medians[0] >= medians[1] >= medians[2]
        details.append(f"{theta.kind} " + " >= ".join(f"{m:.5f}" for m in medians))
    acceptance_line(7, ok, "median final Bregman at 4/2/1%: " + "; ".join(details))


def test_c08_tv_beats_quadratic(acceptance_line):
    g = GridSpec.square(48)
    ops = circular_mean_system(g, 20)
    x_true = rasterize(pat_phantom(), g)
    ys = synthesize(ops, x_true)
    errors = {}
    for theta in (PenaltyFunctional.quadratic(0.5), PenaltyFunctional.tvl2(1.0, tv_iters=10)):
        errs = []
        for seed in range(5):
            noisy, delta = add_noise_all(ys, NoiseSpec("relative", 2.0, seed))
            cfg = SolverConfig(tau=TAU, mu0=(1 - 1 / TAU) / theta.beta, mu1=1000.0, delta=delta,
                               max_sweeps=3000, step_rule="adaptive", stop_rule="residual_sum")
            res = run(Problem(ops, noisy, theta, g.zeros(), x_true), cfg)
            errs.append(norm(res.x - x_true) / norm(x_true))
        errors[theta.kind] = float(np.median(errs))
    ok = errors["tvl2"] < errors["quad"]
    acceptance_line(8, ok, f"median relative error tvl2 {errors['tvl2']:.4f} vs quad {errors['quad']:.4f}")


def test_c09_elliptic_anchor(acceptance_line):
    worst = 0.0
    for method in ("direct", "cg"):
        base = EllipticParamOp(100)
        c = rasterize(pde_coefficient(), base.grid)
        X, Y = base.grid.mesh()
        op = EllipticParamOp(100, source=GridFunction(base.grid, c.values * (X + Y)), method=method)
        worst = max(worst, float(np.max(np.abs(op.state(c).values - (X + Y)))))
    acceptance_line(9, worst <= 1e-8, f"max |u - (x+y)| at nodes {worst:.1e} (direct and cg)")


def test_c10_preset_fidelity(acceptance_line):
    expected = {
        "PAT": ["measurements = 80", "tau = 1.2", "delta = 0.01",
                "# mu0 = (1-1/tau)/(beta*sqrt(pi)) = %r" % ((1 - 1 / 1.2) / math.sqrt(math.pi))],
        "EllipticID": ["tau = 1.1", "delta = 5e-05", "mu1 = 4000.0",
                       "# mu0 = (1-1/tau)/beta = %r" % (1 - 1 / 1.1)],
        "Schlieren": ["measurements = 100", "tau = 1.5", "delta = 0.002", "mu1 = 1000.0",
                      "# mu0 = (1-1/tau)/beta = %r" % (1 - 1 / 1.5)],
    }
    missing = []
    for name, lines in expected.items():
        echo = parse_config_text(f"preset = {name}\n").echo().splitlines()
        missing += [f"{name}: {ln}" for ln in lines if ln not in echo]
    spec = preset("EllipticID")
    ok = not missing and spec.delta == 0.5e-4 and spec.measurements == 1
    acceptance_line(10, ok, "all preset values echoed" if ok else f"missing {missing}")


def test_c11_norm_bound(acceptance_line):
    g = GridSpec.square(64)
    centers = [(0.96 * math.cos(a), 0.96 * math.sin(a)) for a in np.linspace(0, 2 * math.pi, 8, endpoint=False)]
    worst = max(estimate_norm(CircularMeanOp(g, c)) for c in centers)
    bound = 2 * math.sqrt(math.pi) + 0.1
    acceptance_line(11, worst <= bound, f"power-iteration norm {worst:.4f} <= {bound:.4f}")


@pytest.mark.parametrize("name,overrides", [
    ("PAT", dict(grid=32, measurements=10, max_sweeps=20)),
    ("EllipticID", dict(grid=16, delta=1e-3, max_sweeps=60)),
    ("Schlieren", dict(grid=24, measurements=8, max_sweeps=20)),
])
def test_c12_determinism(name, overrides, tmp_path, acceptance_line):
    spec = preset(name, seed=12345678901234567890, **overrides)
    blobs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        write_outputs(run_experiment(spec), out, figure=False)
        blobs.append((out / "trace.csv").read_bytes())
    ok = blobs[0] == blobs[1] and blobs[0].count(b"\n") > 1
    acceptance_line(12, ok, f"{name}: trace.csv byte-identical across runs ({len(blobs[0])} bytes)")
