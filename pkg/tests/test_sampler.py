import numpy as np
import pytest
from scipy import stats

from conftest import complete, cycle
from regspec import _kernels_py, kernels
from regspec.errors import ConfigError, InfeasibleError, ResourceGuardError
from regspec.graph import complement
from regspec.sampler import (SamplerConfig, SwitchSampler, circulant_seed, default_burn_in,
                             default_thinning, edge_mask, enumerate_all, sample_uniform,
                             switch_chain_step, switch_reachable)

COMPILED = kernels.compiled_backend is not None


def test_circulant_seed():
    assert circulant_seed(6, 2) == cycle(6)
    g = circulant_seed(6, 3)
    assert g.degree == 3 and all(g.has_edge(i, (i + 3) % 6) for i in range(6))
    with pytest.raises(InfeasibleError):
        circulant_seed(5, 3)
    with pytest.raises(InfeasibleError):
        circulant_seed(4, 4)


def test_config_collects_all_problems():
    with pytest.raises(ConfigError) as exc:
        SamplerConfig(5, 7, -1, burn_in_steps=-3, thinning=0)
    assert len(exc.value.violations) == 5


def test_defaults():
    cfg = SamplerConfig(1000, 300, 0)
    assert cfg.burn_in == default_burn_in(1000, 300) == 6_000_000
    assert cfg.thin == default_thinning(1000, 300) == 600_000
    assert SamplerConfig(6, 3, 0).burn_in == 10**4


def test_enumeration_counts():
    assert enumerate_all(4, 3) == [complete(4)]
    six3 = enumerate_all(6, 3)
    assert len(six3) == 70 and len(set(six3)) == 70
    assert len(enumerate_all(6, 2)) == 70
    assert len(enumerate_all(8, 3)) == 19355
    assert all(g.degree == 3 for g in six3)
    with pytest.raises(ResourceGuardError):
        enumerate_all(8, 3, limit=100)


def test_k4_chain_is_stationary(rng):
    k4 = complete(4)
    for _ in range(20):
        assert switch_chain_step(k4, rng) is k4
    assert sample_uniform(SamplerConfig(4, 3, 1)) == k4


def test_cycle_step_stays_simple(rng):
    g = cycle(6)
    for _ in range(200):
        g = switch_chain_step(g, rng)
        a = g.adjacency()
        assert set(a.sum(axis=1)) == {2} and np.array_equal(a, a.T) and not a.diagonal().any()


@pytest.mark.parametrize("n,d", [(6, 3), (8, 3)])
def test_irreducible(n, d):
    reach = switch_reachable(circulant_seed(n, d))
    assert reach == {edge_mask(g) for g in enumerate_all(n, d)}


def test_chain_visits_all_seventy():
    s = SwitchSampler(SamplerConfig(6, 3, 11, burn_in_steps=0, thinning=5))
    seen = {s.sample().key() for _ in range(3000)}
    assert len(seen) == 70


def test_determinism():
    a = [g.key() for g in SwitchSampler(SamplerConfig(50, 10, 99)).samples(3)]
    b = [g.key() for g in SwitchSampler(SamplerConfig(50, 10, 99)).samples(3)]
    c = [g.key() for g in SwitchSampler(SamplerConfig(50, 10, 100)).samples(3)]
    assert a == b and a != c


def test_samples_are_regular():
    for g in SwitchSampler(SamplerConfig(30, 7 * 2, 5)).samples(4):
        assert np.all(g.adjacency().sum(axis=1) == 14)


def _counts(n, d, seed, count, post=lambda g: g):
    index = {g.key(): t for t, g in enumerate(enumerate_all(n, 3))}
    s = SwitchSampler(SamplerConfig(n, d, seed, burn_in_steps=10 * n * d))
    counts = np.zeros(len(index))
    for g in s.samples(count):
        counts[index[post(g).key()]] += 1
    return counts


def test_uniform_chi_square_short():
    counts = _counts(6, 3, 2024, 7000)
    assert stats.chisquare(counts).pvalue > 0.01


def test_complement_symmetry_chi_square():
    counts = _counts(6, 2, 77, 7000, post=complement)
    assert stats.chisquare(counts).pvalue > 0.01


@pytest.mark.skipif(not COMPILED, reason="compiled extension not built")
def test_backends_agree_on_chain():
    g = circulant_seed(40, 9 + 1)
    outs = []
    for backend in (kernels.compiled_backend, _kernels_py):
        bits = np.array(g.bits, copy=True)
        edges = np.ascontiguousarray(g.edges(), dtype=np.int32)
        acc = backend.run_switch_chain(bits, edges, np.random.PCG64(3), 20000)
        outs.append((acc, bits, edges))
    assert outs[0][0] == outs[1][0] > 0
    assert np.array_equal(outs[0][1], outs[1][1]) and np.array_equal(outs[0][2], outs[1][2])


@pytest.mark.skipif(not COMPILED, reason="compiled extension not built")
def test_backends_agree_on_tridiagonal(rng):
    n = 60
    diag = rng.standard_normal(n)
    off = rng.standard_normal(n - 1)
    offsq = off * off
    c, p = kernels.compiled_backend, _kernels_py
    for x in np.linspace(-4, 4, 9):
        assert c.sturm_count(diag, offsq, x, 1e-300) == p.sturm_count(diag, offsq, x, 1e-300)
    idx = np.array([0, 5, n - 1], dtype=np.int64)
    a = c.tridiag_bisect(diag, offsq, idx, -20.0, 20.0, 1e-300, 1e-15)
    b = p.tridiag_bisect(diag, offsq, idx, -20.0, 20.0, 1e-300, 1e-15)
    assert np.allclose(a, b, atol=1e-13)
    ref = np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    assert np.allclose(a, ref[idx], atol=1e-12)
    res = []
    for backend in (c, p):
        d, e = diag.copy(), np.append(off, 0.0)
        assert backend.tql1(d, e, np.finfo(float).eps) >= 0
        res.append(np.sort(d))
    assert np.allclose(res[0], res[1], atol=1e-12) and np.allclose(res[0], ref, atol=1e-12)


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, REGSPEC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from regspec import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_enumeration_estimate_fails_fast():
    from regspec.sampler import estimated_count

    assert 0.5 * 19355 < estimated_count(8, 3) < 2 * 19355
    assert estimated_count(10, 3) > 1e7
    with pytest.raises(ResourceGuardError):
        enumerate_all(12, 4)
