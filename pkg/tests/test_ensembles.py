import math

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import eigvalsh_tridiagonal

from conftest import cycle
from regspec.ensembles import (constrained_goe, dbm_matrix, dbm_path, dense_goe, goe_edge_sample,
                               goe_tridiagonal, goe_tridiagonal_spectrum, x_functional, x_window)
from regspec.errors import DomainError
from regspec.experiments.common import calibration
from regspec.graph import xi_dense
from regspec.sampler import SamplerConfig, sample_uniform
from regspec.spectral import full_spectrum, q_param


def test_dense_goe_normalization(rng):
    n = 300
    h = dense_goe(n, rng)
    assert np.array_equal(h, h.T)
    off = h[np.triu_indices(n, 1)]
    assert np.var(off) * n == pytest.approx(1.0, abs=0.03)
    assert np.var(np.diag(h)) * n == pytest.approx(2.0, abs=0.4)
    w = np.linalg.eigvalsh(h)
    assert abs(w[-1] - 2) < 0.2 and abs(w[0] + 2) < 0.2


def test_tridiagonal_model(rng):
    diag, off = goe_tridiagonal(5, rng)
    assert diag.shape == (5,) and off.shape == (4,) and np.all(off > 0)
    with pytest.raises(DomainError):
        goe_tridiagonal(0, rng)
    w = goe_tridiagonal_spectrum(2000, rng)
    assert abs(w[-1] - 2) < 0.1 and abs(w[0] + 2) < 0.1


def test_edge_sample_matches_full_tridiagonal():
    for seed in range(5):
        r1, r2 = np.random.default_rng(seed), np.random.default_rng(seed)
        top, bottom = goe_edge_sample(300, 4, r1)
        diag, off = goe_tridiagonal(300, r2)
        w = eigvalsh_tridiagonal(diag, off)
        assert np.allclose(top, w[::-1][:4], atol=1e-12) and np.allclose(bottom, w[:4], atol=1e-12)
    with pytest.raises(DomainError):
        goe_edge_sample(10, 17, np.random.default_rng(0))


@pytest.mark.parametrize("n", [8, 50])
def test_tridiagonal_vs_dense_distribution(n):
    r = np.random.default_rng(100 + n)
    trials = 10_000
    dense = np.array([np.linalg.eigvalsh(dense_goe(n, r)) for _ in range(trials)])
    tri = np.array([goe_tridiagonal_spectrum(n, r) for _ in range(trials)])
    assert stats.ks_2samp(dense.ravel(), tri.ravel()).statistic <= 0.02
    top_dense = dense[:, -1]
    top_tri = np.array([goe_edge_sample(n, 1, r)[0][0] for _ in range(trials)])
    assert stats.ks_2samp(top_dense, top_tri).pvalue > 1e-3


def test_constrained_goe_projection(rng):
    n = 40
    w = constrained_goe(n, rng)
    p = np.eye(n) - 1.0 / n
    assert np.array_equal(w, w.T)
    assert np.max(np.abs(p @ w @ p - w)) <= 1e-12
    assert np.max(np.abs(w.sum(axis=1))) <= 1e-12
    with pytest.raises(DomainError):
        constrained_goe(5000, rng)


def test_constrained_goe_covariance_is_switching_direction():
    # Gaussian integration by parts E[W_ij f(W)] = sum Cov(W_ij, W_ab) E[d_ab f]; the covariance
    # matrix of W_ij equals N^-3 sum_kl xi_ij^kl, which is the switching-direction identity
    n = 8
    p = np.eye(n) - 1.0 / n
    for i in range(n):
        for j in range(n):
            s = sum(xi_dense(n, i, j, k, l) for k in range(n) for l in range(n)) / n**3
            cov = (np.outer(p[i], p[j]) + np.outer(p[j], p[i])) / n
            assert np.array_equal(s, cov) or np.max(np.abs(s - cov)) <= 1e-15


def test_constrained_goe_empirical_covariance():
    n, trials = 8, 40_000
    r = np.random.default_rng(8)
    ws = np.array([constrained_goe(n, r) for _ in range(trials)])
    p = np.eye(n) - 1.0 / n
    for (i, j), (c, d) in [((0, 1), (0, 1)), ((0, 1), (2, 3)), ((0, 0), (0, 0)), ((0, 1), (0, 2))]:
        emp = np.mean(ws[:, i, j] * ws[:, c, d])
        ref = (p[i, c] * p[j, d] + p[i, d] * p[j, c]) / n
        assert emp == pytest.approx(ref, abs=5 / math.sqrt(trials) * 0.3)


def test_constrained_goe_ibp_monte_carlo():
    # both sides of E[W_ij f(W)] = N^-3 sum_kl E[d/dt f(W + t xi_ij^kl)] for two polynomials f
    n, trials = 8, 40_000
    r = np.random.default_rng(9)
    ws = np.array([constrained_goe(n, r) for _ in range(trials)])
    i, j = 1, 4
    x = sum(xi_dense(n, i, j, k, l) for k in range(n) for l in range(n)) / n**3
    # f(W) = W_ij: d/dt f(W + t xi) = xi_ij
    assert np.mean(ws[:, i, j] ** 2) == pytest.approx(x[i, j], rel=0.05)
    # f(W) = W_ij^3: E[W_ij^4] = 3 s^2 and N^-3 sum E[3 W_ij^2 xi_ij] = 3 s * s
    assert np.mean(ws[:, i, j] ** 4) == pytest.approx(3 * x[i, j] ** 2, rel=0.1)


def test_x_window_and_functional():
    a, b, eta = x_window(1000, 0.1, 1.0)
    assert a == pytest.approx(0.01) and b == pytest.approx(1000 ** (-2 / 3 + 0.1))
    assert eta == pytest.approx(1000 ** (-2 / 3 - 0.1))
    rng = np.random.default_rng(1)
    eigs = np.sort(goe_tridiagonal_spectrum(1000, rng))[::-1]
    g = x_functional(eigs, 1000)
    e = x_functional(eigs, 1000, method="exact")
    assert abs(g - e) <= 1e-6 * max(1, abs(e))
    with pytest.raises(DomainError):
        x_functional(eigs, 1000, method="simpson")


def _graph(n, d, seed):
    return sample_uniform(SamplerConfig(n, d, seed))


def test_dbm_time_zero_and_pure_scaling():
    g = _graph(300, 90, 4)
    w = full_spectrum(g)
    q = q_param(300, 90)
    times = [0.0, 0.1, 0.5, 1.0]
    path = dbm_path(g, times, w=0)
    assert path.xi2[0] == pytest.approx(w[1] / q, abs=1e-10)
    assert np.allclose(path.xi2, np.exp(-np.array(times) / 2) * w[1] / q, atol=1e-10)
    assert np.allclose(path.top, np.exp(-np.array(times) / 2) * 90 / q, atol=1e-10)
    exact = [x_functional(s, 300, method="exact") for s in path.eigs]
    assert np.allclose(path.x_t, exact, atol=1e-6)


def test_dbm_weyl_and_ordering(rng):
    g = _graph(200, 60, 5)
    from regspec.ensembles import constrained_goe as cg

    w = cg(200, np.random.default_rng(6))
    times = np.linspace(0, 0.3, 7)
    path = dbm_path(g, times, w=w)
    a = g.adjacency(float) / q_param(200, 60)
    for s, t, xs, xt in zip(times[:-1], times[1:], path.xi2[:-1], path.xi2[1:]):
        op = np.linalg.norm(dbm_matrix(a, w, t) - dbm_matrix(a, w, s), 2)
        assert abs(xt - xs) <= op + 1e-10
    assert np.all(path.top > path.xi2)


def test_dbm_continuity_against_calibrated_threshold():
    cal = calibration().get("dbm", {}).get("continuity")
    if cal is None:
        pytest.skip("calibration artifact missing")
    g = _graph(1000, 300, 31337)
    times = np.arange(0.0, 0.0205, 1e-3)
    path = dbm_path(g, times, np.random.default_rng(31337))
    assert np.max(np.abs(np.diff(path.xi2))) <= cal["jump_threshold"]


def test_dbm_argument_checks():
    g = cycle(8)
    with pytest.raises(DomainError):
        dbm_path(g, [0.1, 0.2], w=0)
    with pytest.raises(DomainError):
        dbm_path(g, [0.0, 2.0], w=0)
    with pytest.raises(DomainError):
        dbm_path(g, [0.0, 0.5], w=1.0)
    with pytest.raises(DomainError):
        dbm_path(g, [0.0, 0.5])
