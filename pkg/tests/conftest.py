import numpy as np
import pytest

from lwkaczmarz.grid import GridSpec
from lwkaczmarz.operators import CircularMeanOp, ScaledOperator, estimate_norm, pat_centers
from lwkaczmarz.phantoms import pat_phantom, rasterize, synthesize

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record a ``PASS``/``FAIL`` line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)


def toy_operators(n: int = 32):
    """Two circular-mean operators scaled to norm just below one."""
    g = GridSpec.square(n)
    ops = []
    for c in pat_centers(2):
        op = CircularMeanOp(g, c)
        ops.append(ScaledOperator(op, 1.0 / (1.01 * estimate_norm(op))))
    return g, ops


@pytest.fixture(scope="session")
def toy_system():
    g, ops = toy_operators(32)
    x_true = rasterize(pat_phantom(), g)
    return g, ops, x_true, synthesize(ops, x_true)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
