import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhl.grid import (GridFunction, convolve, convolve_direct, integrate, l1_distance,
                      l2_distance, l2_shift_modulus, read_csv, write_csv)


def grid_of(values, dt=0.01):
    return GridFunction(dt, np.asarray(values, dtype=float))


def test_validation():
    with pytest.raises(ValueError):
        GridFunction(0.0, np.ones(4))
    with pytest.raises(ValueError):
        GridFunction(0.1, np.ones(1))
    with pytest.raises(ValueError):
        GridFunction(0.1, np.array([1.0, np.inf]))


def test_box_convolution_is_triangle():
    # indicator of [0,1] sampled at dt=0.01: (f*f)(1) = 1 exactly
    dt = 0.01
    f = grid_of(np.ones(100), dt)
    conv = convolve(f, f)
    k = int(round(1.0 / dt))
    assert conv.values[k] == pytest.approx(1.0, abs=1e-6)
    # triangle: linear rise
    assert conv.values[k // 2] == pytest.approx(0.5, abs=1e-6)
    assert conv.values[0] == 0.0


def test_delta_cell_is_convolution_identity():
    dt = 0.01
    rng = np.random.default_rng(0)
    g = grid_of(rng.uniform(0.5, 2.0, 200), dt)
    delta = grid_of(np.concatenate(([1.0 / dt], np.zeros(199))), dt)
    conv = convolve(delta, g)
    # f*g ~ g within O(dt): node k of the conv carries cell k-1 of g
    assert np.allclose(conv.values[1:200], g.values[:199], atol=1e-12)


def test_fft_matches_direct():
    rng = np.random.default_rng(1)
    f = grid_of(rng.uniform(0.0, 3.0, 257))
    g = grid_of(rng.uniform(0.0, 3.0, 257))
    a = convolve(f, g)
    b = convolve_direct(f, g)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31 - 1))
def test_convolution_commutes(n, seed):
    rng = np.random.default_rng(seed)
    f = grid_of(rng.uniform(-1.0, 1.0, n))
    g = grid_of(rng.uniform(-1.0, 1.0, n))
    assert np.allclose(convolve(f, g).values, convolve(g, f).values, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.floats(-2.0, 2.0), st.integers(0, 2**31 - 1))
def test_convolution_bilinear(n, c, seed):
    rng = np.random.default_rng(seed)
    f = grid_of(rng.uniform(-1.0, 1.0, n))
    g = grid_of(rng.uniform(-1.0, 1.0, n))
    h = grid_of(rng.uniform(-1.0, 1.0, n))
    lhs = convolve(f + c * g, h).values
    rhs = convolve(f, h).values + c * convolve(g, h).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_distance_trivials():
    f = grid_of(np.full(100, 2.0))
    g = grid_of(np.full(100, 2.0))
    assert l2_distance(f, g, 1.0) == 0.0
    h = grid_of(np.full(100, 2.5))
    # constant difference c on [0,1] -> |c|
    assert l2_distance(f, h, 1.0) == pytest.approx(0.5, rel=1e-12)
    assert l1_distance(f, h, 1.0) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        l2_distance(f, grid_of(np.ones(100), dt=0.02), 1.0)


def test_shift_modulus_trivials_and_errors():
    f = grid_of(np.full(200, 3.0))
    assert l2_shift_modulus(f, 0.05) == 0.0
    with pytest.raises(ValueError):
        l2_shift_modulus(f, 0.0151)  # not a multiple of dt
    with pytest.raises(ValueError):
        l2_shift_modulus(f, 2.0)  # beyond the domain
    # pure power law u^(a-1): modulus scales like h^(2a-1)
    a = 0.6
    dt = 2.0**-16
    n = 1 << 16
    edges = np.arange(n + 1) * dt
    cells = np.diff(edges**a) / (a * dt)
    f = GridFunction(dt, cells)
    m1 = l2_shift_modulus(f, 64 * dt)
    m2 = l2_shift_modulus(f, 128 * dt)
    assert np.log2(m2 / m1) == pytest.approx(2 * a - 1, abs=0.1)


def test_integrate_and_restrict():
    f = grid_of(np.ones(100))
    assert integrate(f) == pytest.approx(1.0)
    assert integrate(f, 0.5) == pytest.approx(0.5)
    assert len(f.restricted(0.25)) == 25


def test_csv_roundtrip(tmp_path):
    f = grid_of(np.linspace(0.0, 1.0, 64) ** 2)
    path = tmp_path / "f.csv"
    write_csv(f, path, metadata={"seed": 7})
    g, meta = read_csv(path)
    assert meta["seed"] == "7"
    assert g.dt == pytest.approx(f.dt, rel=1e-12)
    assert np.allclose(g.values, f.values, rtol=1e-12)
    # 12+ significant digits survive the round trip
    assert np.max(np.abs(g.values - f.values)) < 1e-12
