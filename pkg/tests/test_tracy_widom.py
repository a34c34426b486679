import numpy as np
import pytest

from regspec.tracy_widom import (TABLE_HI, TABLE_LO, Tw1Table, generate_table, load_table, tw1_cdf,
                                 tw1_fredholm, tw1_painleve)

# literature values of the GOE Tracy-Widom mean and variance
TW1_MEAN = -1.2065335745820
TW1_VAR = 1.6077810345810


def test_table_shape_and_monotone():
    t = load_table()
    assert t.lo == TABLE_LO and t.hi == TABLE_HI
    assert np.all(np.diff(t.f) >= 0)
    assert t.f[0] < 1e-12 and 1 - t.f[-1] < 1e-7


def test_cdf_bounds_and_clamps():
    xs = np.linspace(-20, 20, 2001)
    f = tw1_cdf(xs)
    assert np.all((f >= 0) & (f <= 1)) and np.all(np.diff(f) >= 0)
    assert tw1_cdf(-50.0) == 0.0 and tw1_cdf(50.0) == 1.0
    assert isinstance(tw1_cdf(0.0), float)


def test_interpolation_against_oracle():
    rng = np.random.default_rng(3)
    for s in rng.uniform(-6, 5, 25):
        assert abs(tw1_cdf(s) - tw1_fredholm(s)) <= 1e-4


def test_fredholm_against_painleve():
    s = np.array([-6.0, -3.5, -1.27, 0.0, 2.5])
    pv = tw1_painleve(s)
    fh = np.array([tw1_fredholm(x) for x in s])
    assert np.max(np.abs(pv - fh)) <= 1e-7


def test_moments_match_literature():
    t = load_table()
    assert t.mean() == pytest.approx(TW1_MEAN, abs=1e-5)
    assert t.meta["mean"] == pytest.approx(TW1_MEAN, abs=1e-8)
    assert t.meta["variance"] == pytest.approx(TW1_VAR, abs=1e-8)
    assert tw1_cdf(t.median()) == pytest.approx(0.5, abs=1e-12)


def test_fredholm_nodes_converged():
    for s in (-4.0, -1.0, 1.0):
        assert tw1_fredholm(s, 96) == pytest.approx(tw1_fredholm(s, 128), abs=1e-12)


def test_generate_table_small_range():
    s, f = generate_table(lo=-2.0, hi=-1.0, step=0.25)
    assert s.tolist() == [-2.0, -1.75, -1.5, -1.25, -1.0]
    assert np.allclose(f, tw1_cdf(s), atol=1e-10)


def test_table_validation():
    with pytest.raises(ValueError):
        Tw1Table([0.0, 0.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        Tw1Table([0.0, 1.0], [0.2, 0.1])
