import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lwkaczmarz.grid import DataVector, GridSpec, data_norm, norm
from lwkaczmarz.operators import CircularMeanOp, pat_centers
from lwkaczmarz.phantoms import (NoiseSpec, Phantom, add_noise, add_noise_all, disc, pat_phantom,
                                 pde_coefficient, rasterize, rect, schlieren_phantom, synthesize)


def test_empty_phantom_is_zero():
    g = GridSpec.square(8)
    assert not np.any(rasterize(Phantom(), g).values)


def test_pde_coefficient_values():
    g = GridSpec(100, 100, 0.0, 1.0, 0.0, 1.0)
    c = rasterize(pde_coefficient(), g)
    X, Y = g.mesh()

    def at(x, y):
        k = np.argmin((X - x) ** 2 + (Y - y) ** 2)
        return c.values.flat[k]

    assert at(0.65, 0.36) == 1.0
    assert at(0.35, 0.75) == 0.5
    assert at(0.05, 0.05) == 0.0
    assert set(np.unique(c.values)) <= {0.0, 0.5, 1.0}


def test_overlaps_add():
    g = GridSpec.square(20)
    p = Phantom((disc(0, 0, 0.5, 1.0),)) + Phantom((rect(0, 0, 0.1, 0.1, 2.0),))
    assert rasterize(p, g).values.max() == 3.0


def test_desk_phantoms_are_supported_inside_the_disc():
    g = GridSpec.square(64)
    X, Y = g.mesh()
    outside = X**2 + Y**2 > 0.96**2
    for p in (pat_phantom(), schlieren_phantom()):
        f = rasterize(p, g).values
        assert np.any(f) and not np.any(f[outside])


def test_parse_describe_round_trip():
    text = "disc 0.1 -0.2 0.3 1; ellipse 0 0 0.5 0.25 -2; rect 0.5 0.5 0.1 0.2 0.75"
    p = Phantom.parse(text)
    assert len(p.primitives) == 3
    assert Phantom.parse(p.describe()) == p
    assert Phantom.parse(" ; ") == Phantom()


@pytest.mark.parametrize("text,needle", [
    ("blob 0 0 1 1", "unknown primitive"), ("disc 0 0 1", "takes 4"),
    ("rect 0 0 x 1 1", "bad number"), ("disc 0 0 -1 1", "positive"),
])
def test_parse_errors(text, needle):
    with pytest.raises(ValueError, match=needle):
        Phantom.parse(text)


def test_disc_norm_converges_under_refinement():
    # |disc(r=0.5, v=1)|^2 = pi r^2
    p = Phantom((disc(0.1, -0.05, 0.5, 1.0),))
    errs = [abs(norm(rasterize(p, GridSpec.square(n))) ** 2 - math.pi * 0.25) for n in (32, 128, 512)]
    assert errs[-1] < 2e-3 and errs[-1] < errs[0]


def test_synthesize_zero_gives_zero():
    g = GridSpec.square(16)
    ops = [CircularMeanOp(g, c, n_radii=10) for c in pat_centers(3)]
    assert all(not np.any(y.values) for y in synthesize(ops, g.zeros()))


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", 1.0)
    with pytest.raises(ValueError):
        NoiseSpec("absolute", -1.0)


def test_zero_noise_is_identity():
    y = DataVector([1.0, 2.0], [0.5, 0.5])
    yd, d = add_noise(y, NoiseSpec("absolute", 0.0))
    assert d == 0.0 and np.array_equal(yd.values, y.values) and yd is not y


def test_noise_streams():
    y = DataVector(np.ones(50), np.full(50, 0.02))
    a, _ = add_noise(y, NoiseSpec("absolute", 0.1, 3), 0)
    b, _ = add_noise(y, NoiseSpec("absolute", 0.1, 3), 0)
    c, _ = add_noise(y, NoiseSpec("absolute", 0.1, 3), 1)
    d, _ = add_noise(y, NoiseSpec("absolute", 0.1, 4), 0)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert not np.array_equal(a.values, d.values)
    # the stream for index i does not depend on how many measurements precede it
    ys, _ = add_noise_all([y, y, y], NoiseSpec("absolute", 0.1, 3))
    assert np.array_equal(ys[1].values, c.values)


def test_noise_is_bounded_uniform():
    y = DataVector(np.zeros(2000), np.ones(2000))
    yd, d = add_noise(y, NoiseSpec("absolute", 1.0, 0))
    scale = 1.0 / data_norm(DataVector(np.random.default_rng([0, 0]).uniform(-1, 1, 2000), np.ones(2000)))
    assert np.max(np.abs(yd.values)) <= scale


def test_add_noise_all_reports_max_level():
    ys = [DataVector(np.ones(10), np.full(10, 0.1)) * s for s in (1.0, 3.0, 2.0)]
    noisy, delta = add_noise_all(ys, NoiseSpec("relative", 5.0, 0))
    assert delta == pytest.approx(0.05 * 3.0, rel=1e-12)
    for y, yd in zip(ys, noisy):
        assert data_norm(yd - y) == pytest.approx(0.05 * data_norm(y), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.floats(1e-6, 1e3), st.integers(0, 2**63 - 1), st.integers(0, 99),
       st.sampled_from(["absolute", "relative"]))
def test_noise_norm_is_exact(m, level, seed, index, mode):
    rng = np.random.default_rng(seed % 1000)
    y = DataVector(rng.standard_normal(m) + 2.0, rng.uniform(0.1, 1.0, m))
    yd, d = add_noise(y, NoiseSpec(mode, level, seed), index)
    target = level if mode == "absolute" else level / 100 * data_norm(y)
    assert d == pytest.approx(target, rel=1e-12)
    assert data_norm(yd - y) == d
