import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import complete, cycle, petersen
from regspec.errors import DomainError, NumericalError
from regspec.sampler import SamplerConfig, sample_uniform
from regspec.spectral import (EdgeSample, GreenEvaluator, SpectralDomain, SpectralPoint, delocalization,
                              entrywise_law_error, extreme_eigs, full_spectrum, green, power_green_check,
                              q_param, self_consistent_matrix, self_consistent_residual_avg,
                              self_consistent_residual_entry, semicircle_m, ward_residual, window_count)


def sample(n, d, seed):
    return sample_uniform(SamplerConfig(n, d, seed))


def test_q_param():
    assert q_param(1000, 300) == pytest.approx(math.sqrt(210))
    assert q_param(40, 20) == pytest.approx(math.sqrt(10))
    assert q_param(10, 9) == pytest.approx(math.sqrt(0.9))
    with pytest.raises(DomainError):
        q_param(10, 0)


def test_semicircle_branch():
    assert semicircle_m(1j * 1e6) == pytest.approx(1j * 1e-6, rel=1e-6)
    assert semicircle_m(complex(0, 1e-12)) == pytest.approx(1j, abs=1e-9)
    m = semicircle_m(complex(3, 1e-9))
    assert m.real == pytest.approx((-3 + math.sqrt(5)) / 2, abs=1e-8) and abs(m.imag) < 1e-8
    with pytest.raises(DomainError):
        semicircle_m(1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(1e-8, 20))
def test_semicircle_residual(e, eta):
    z = complex(e, eta)
    m = semicircle_m(z)
    assert m.imag > 0 and abs(1 + z * m + m * m) <= 1e-13 * max(1, abs(z)) ** 2


def test_spectral_point_and_domain():
    p = SpectralPoint(1.0, 0.5)
    assert p.z == 1 + 0.5j and p.kappa == 3.0
    with pytest.raises(DomainError):
        SpectralPoint(0.0, 0.0)
    bulk = SpectralDomain.bulk(2000)
    edge = SpectralDomain.edge(2000)
    assert len(bulk.points) == 40 and len(edge.points) == 20
    assert all(bulk.contains(p) for p in bulk.points)
    # the near-edge points also lie in the bulk domain
    assert all(bulk.contains(p) for p in edge.points)
    with pytest.raises(DomainError):
        SpectralDomain(100, 0.1, "bulk", (SpectralPoint(20.0, 1.0),))


def test_full_spectrum_closed_forms():
    assert np.allclose(full_spectrum(complete(4)), [3, -1, -1, -1], atol=1e-8)
    for n in (6, 12, 100):
        ref = np.sort(2 * np.cos(2 * np.pi * np.arange(n) / n))[::-1]
        for method in ("lapack", "householder-ql"):
            assert np.allclose(full_spectrum(cycle(n), method), ref, atol=1e-8)
    assert np.allclose(full_spectrum(petersen()), [3] + [1] * 5 + [-2] * 4, atol=1e-8)
    with pytest.raises(DomainError):
        full_spectrum(petersen(), "nope")


def test_full_spectrum_residuals():
    g = sample(120, 30, 1)
    a = g.adjacency(float)
    w, v = np.linalg.eigh(a)
    assert np.allclose(np.sort(w)[::-1], full_spectrum(g))
    assert np.max(np.linalg.norm(a @ v - v * w, axis=0)) <= 1e-8 * 30


def test_extreme_eigs_closed_forms():
    top, bottom = extreme_eigs(complete(4), 1)
    assert top == pytest.approx([-1]) and bottom == pytest.approx([-1])
    top, _ = extreme_eigs(cycle(12), 2)
    assert np.allclose(top, [math.sqrt(3)] * 2)
    with pytest.raises(DomainError):
        extreme_eigs(cycle(12), 17)


def test_extreme_eigs_matches_dense():
    g = sample(400, 120, 2)
    w = full_spectrum(g)
    top, bottom = extreme_eigs(g, 3)
    assert np.allclose(top, w[1:4], atol=1e-7 * 120)
    assert np.allclose(bottom, w[::-1][:3], atol=1e-7 * 120)


def test_green_k4_closed_form():
    g = complete(4)
    z = 0.3 + 0.7j
    q = q_param(4, 3)
    snap = green(g, z)
    p = np.eye(4) - 0.25
    assert np.allclose(snap.matrix, p / (-1 / q - z))
    assert snap.gbar == pytest.approx(0.75 / (-1 / q - z))
    assert snap[0, 1] == pytest.approx(-0.25 / (-1 / q - z))
    ge = GreenEvaluator(g)
    assert ward_residual(ge, z, 2) <= 1e-12
    ge_col = ge.column(z, 0)
    assert np.sum(np.abs(ge_col) ** 2) == pytest.approx(abs(-1 / q - z) ** -2 * 0.75)


@pytest.mark.parametrize("n,d", [(50, 10), (200, 60)])
def test_green_identities(n, d, rng):
    g = sample(n, d, n + d)
    ge = GreenEvaluator(g)
    u = ge.vectors
    assert np.allclose(u.T @ u, np.eye(n - 1), atol=1e-10)
    assert np.allclose(u.sum(axis=0), 0, atol=1e-10)
    a = g.adjacency(float)
    e = np.ones((n, n)) / n
    for _ in range(10):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.01, 2))
        gm = ge.matrix(z)
        assert np.max(np.abs(gm.sum(axis=0))) <= 1e-10 and np.max(np.abs(gm.sum(axis=1))) <= 1e-10
        assert np.allclose(gm, gm.T, atol=1e-12)
        for j in range(0, n, 13):
            col = gm[:, j]
            assert ward_residual(ge, z, j) <= 1e-10 * (col[j].imag / z.imag + 1)
        assert np.max(np.abs(gm @ a - ge.q * (z * gm + np.eye(n) - e))) <= 1e-9
        p = self_consistent_matrix(ge, z)
        alt = (a @ gm) / ge.q + ge.gbar(z) * gm + 1 / n
        assert np.max(np.abs(p - alt)) <= 1e-9
        assert self_consistent_residual_entry(ge, z) == pytest.approx(np.max(np.abs(p)))
        gb = ge.gbar(z)
        assert self_consistent_residual_avg(ge, z) == pytest.approx(abs(1 + z * gb + gb * gb))
        assert ge.entry(z, 1, 2) == pytest.approx(gm[1, 2])
        assert np.allclose(ge.column(z, 3), gm[:, 3])


def test_ward_relabel_invariant(rng):
    g = sample(60, 20, 7)
    perm = rng.permutation(60)
    a = g.adjacency()[np.ix_(perm, perm)]
    from regspec.graph import RegularGraph

    h = RegularGraph.from_adjacency(a)
    z = 0.2 + 0.3j
    r1 = ward_residual(GreenEvaluator(g), z, int(perm[5]))
    r2 = ward_residual(GreenEvaluator(h), z, 5)
    assert abs(r1 - r2) <= 1e-12


def test_semicircle_q_zero():
    z = 0.4 + 0.9j
    m = semicircle_m(z)
    assert abs(1 + z * m + m * m) < 1e-14


def test_law_error_bounds():
    ge = GreenEvaluator(complete(4))
    z = 0.5 + 0.1j
    le = entrywise_law_error(ge, z)
    q = q_param(4, 3)
    ref = max(abs(0.75 / (-1 / q - z) - semicircle_m(z)), 0.25 / abs(-1 / q - z))
    assert le.error == pytest.approx(ref)
    assert le.bound_strong == pytest.approx((4 * 0.1) ** -0.5 + 3**-0.5)
    assert le.bound_weak == pytest.approx((4 * 0.1) ** -0.25 + 3**-0.25)


def test_delocalization():
    ge = GreenEvaluator(cycle(12))
    # degenerate Fourier pairs may rotate, but the sup-norm is at most sqrt(2/N)
    assert delocalization(ge) <= math.sqrt(2 / 12) + 1e-12
    assert delocalization(ge) >= 1 / math.sqrt(12)


def test_power_green_check():
    ge = GreenEvaluator(complete(4))
    z = 0.5 + 0.5j
    # A G = q(zG + P) on K4, so the ratio is explicit
    gm = ge.matrix(z)
    ag = complete(4).adjacency(float) @ gm
    ref = np.max(np.abs(ag)) / ((3**0.5 + 3**-0.5) * np.max(np.abs(gm)))
    assert power_green_check(ge, z, 1) == pytest.approx(ref)
    with pytest.raises(DomainError):
        power_green_check(ge, z, 5)
    with pytest.raises(DomainError):
        power_green_check(ge, 11j, 2)


def test_window_count():
    q = q_param(4, 3)
    assert window_count(complete(4), -1.1 / q - 0.1, -0.9 / q) == 3
    assert window_count(GreenEvaluator(complete(4)), 0.0, 5.0) == 0
    with pytest.raises(DomainError):
        window_count(complete(4), 1.0, 1.0)


def test_edge_sample():
    w = full_spectrum(petersen())
    es = EdgeSample.from_spectrum(w, 10, 3, 3)
    q = q_param(10, 3)
    assert es.lambda_2 == pytest.approx(1) and es.lambda_n == pytest.approx(-2)
    assert es.edge_top == pytest.approx(10 ** (2 / 3) * (1 / q - 2))
    assert es.rigidity_sum >= es.rigidity_max
    with pytest.raises(NumericalError):
        EdgeSample.from_spectrum(w - 1, 10, 3, 3)
    with pytest.raises(DomainError):
        EdgeSample.from_spectrum(w, 10, 3, 1)


def _calibrated(part):
    from regspec.experiments.common import calibration

    cal = calibration().get(part)
    if cal is None:
        pytest.skip("calibration artifact missing")
    return cal


def test_power_green_within_calibrated_constant():
    from regspec.experiments.calibration import CALIBRATION_SEED
    from regspec.harness import parse_config
    from regspec.experiments.common import trial_graph

    cal = _calibrated("power_green")
    cfg = parse_config({"N": 1000, "d": 300, "trials": 4, "seed": 11}, kind="rigidity")
    assert cfg.seed != CALIBRATION_SEED
    z = complex(*cal["config"]["z"])
    for t in range(cfg.trials):
        assert power_green_check(GreenEvaluator(trial_graph(cfg, t)), z, cal["config"]["r"]) <= cal["constant"]


def test_power_deviation_within_calibrated_constant():
    from regspec.experiments.calibration import power_deviation_ratios
    from regspec.harness import parse_config

    cal = _calibrated("power_deviation")
    cfg = parse_config({"N": 1000, "d": 300, "trials": 4, "seed": 12}, kind="rigidity")
    ratios = power_deviation_ratios(cfg, cal["config"]["r"], cal["config"]["rows"])
    assert max(ratios) <= cal["constant"]
