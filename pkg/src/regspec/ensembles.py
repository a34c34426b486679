"""GOE reference samplers, the constrained GOE and the interpolating path.

GOE normalization: off-diagonal variance 1/N, diagonal variance 2/N, so the
spectrum fills [-2, 2]. The tridiagonal model is the beta = 1
Dumitriu-Edelman matrix scaled by N^{-1/2}: diagonal N(0, 2/N) and
off-diagonal chi_{N-i} / sqrt(N), i = 1..N-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .errors import DomainError, NumericalError
from .spectral import q_param

__all__ = [
    "dense_goe",
    "goe_tridiagonal",
    "goe_tridiagonal_spectrum",
    "goe_edge_sample",
    "constrained_goe",
    "DbmPath",
    "dbm_path",
    "dbm_matrix",
    "x_window",
    "x_functional",
]

TRIDIAGONAL_LIMIT = 10**5
CONSTRAINED_LIMIT = 4096


def dense_goe(n, rng):
    x = rng.standard_normal((n, n))
    return (x + x.T) / math.sqrt(2 * n)


def goe_tridiagonal(n, rng):
    """``(diag, off)`` of the scaled beta = 1 tridiagonal model."""
    if not 1 <= n <= TRIDIAGONAL_LIMIT:
        raise DomainError(f"N must lie in [1, {TRIDIAGONAL_LIMIT}]")
    diag = rng.normal(0.0, math.sqrt(2.0 / n), size=n)
    off = np.sqrt(rng.chisquare(np.arange(n - 1, 0, -1, dtype=float))) / math.sqrt(n)
    return diag, off


def goe_tridiagonal_spectrum(n, rng):
    """All eigenvalues of one tridiagonal draw, ascending."""
    diag, off = goe_tridiagonal(n, rng)
    if n == 1:
        return diag.copy()
    return eigvalsh_tridiagonal(diag, off)


def goe_edge_sample(n, k, rng):
    """``(mu_1..mu_k descending, mu_N..mu_{N-k+1} ascending)`` for one GOE draw.

    Eigenvalues come from Sturm-sequence bisection on the tridiagonal model,
    so the cost is O(k N log(1/eps)) rather than O(N^2).
    """
    if not 1 <= k <= min(16, n):
        raise DomainError("k must lie in [1, min(16, N)]")
    diag, off = goe_tridiagonal(n, rng)
    if n == 1:
        return diag.copy(), diag.copy()
    offsq = off * off
    radius = np.abs(diag).copy()
    radius[:-1] += off
    radius[1:] += off
    lo = float(np.min(diag - (radius - np.abs(diag)))) - 1e-12
    hi = float(np.max(diag + (radius - np.abs(diag)))) + 1e-12
    pivmin = np.finfo(float).tiny * max(1.0, float(offsq.max()))
    idx = np.unique(np.concatenate([np.arange(k), np.arange(n - k, n)])).astype(np.int64)
    vals = kernels.tridiag_bisect(np.ascontiguousarray(diag), np.ascontiguousarray(offsq),
                                  idx, lo, hi, pivmin, 4 * np.finfo(float).eps)
    pos = {int(i): v for i, v in zip(idx, vals)}
    top = np.array([pos[n - 1 - i] for i in range(k)])
    bottom = np.array([pos[i] for i in range(k)])
    return top, bottom


def constrained_goe(n, rng):
    """``W = P H P`` with H a dense GOE draw and ``P = I - e e^T``."""
    if not 1 <= n <= CONSTRAINED_LIMIT:
        raise DomainError(f"N must lie in [1, {CONSTRAINED_LIMIT}]")
    h = dense_goe(n, rng)
    w = h - h.mean(axis=0, keepdims=True)
    w -= w.mean(axis=1, keepdims=True)
    return 0.5 * (w + w.T)


def x_window(n, mu=0.1, kappa_const=1.0):
    """``(kappa, upper, eta)`` for the functional X_t."""
    return kappa_const * n ** (-2 / 3), n ** (-2 / 3 + mu), n ** (-2 / 3 - mu)


def _x_exact(eigs, n, a, b, eta):
    c = np.asarray(eigs) - 2.0
    re = 0.5 * np.sum(np.log((c - a) ** 2 + eta**2) - np.log((c - b) ** 2 + eta**2))
    im = np.sum(np.arctan2(eta, c - b) - np.arctan2(eta, c - a))
    return complex(re, im)


def _x_gauss(eigs, n, a, b, eta, nodes):
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    panels = max(1, math.ceil((b - a) / (2 * eta)))
    edges = np.linspace(a, b, panels + 1)
    total = 0j
    eigs = np.asarray(eigs)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        x = lo + half * (x0 + 1)
        z = 2.0 + x + 1j * eta
        vals = np.sum(1.0 / (eigs[:, None] - z[None, :]), axis=0)
        total += half * np.sum(w0 * vals)
    return complex(total)


def x_functional(eigs, n, mu=0.1, kappa_const=1.0, method="gauss", nodes=64):
    """``N * int_kappa^{N^{-2/3+mu}} Gbar(2 + x + i eta) dx`` (X_t is its imaginary part).

    ``eigs`` are the nontrivial eigenvalues, so ``N Gbar = sum_i 1/(eig_i - z)``.
    ``method="gauss"`` is composite Gauss-Legendre with ``nodes`` per panel
    and panels no wider than ``2 eta``; ``method="exact"`` is the
    antiderivative.
    """
    a, b, eta = x_window(n, mu, kappa_const)
    if method == "exact":
        return _x_exact(eigs, n, a, b, eta)
    if method == "gauss":
        return _x_gauss(eigs, n, a, b, eta, nodes)
    raise DomainError(f"unknown method {method!r}")


def dbm_matrix(a, w, t):
    return math.exp(-t / 2) * a + math.sqrt(-math.expm1(-t)) * w


@dataclass(frozen=True)
class DbmPath:
    times: np.ndarray
    xi2: np.ndarray
    x_t: np.ndarray
    top: np.ndarray
    graph_seed: int | None = None
    goe_seed: int | None = None
    eigs: tuple = ()


def _nontrivial_eigs(m, n):
    """Eigenvalues of ``m`` on the complement of e (e must be an eigenvector)."""
    v = np.full(n, 1 / math.sqrt(n))
    v[0] -= 1.0
    v /= np.linalg.norm(v)
    mv = m @ v
    hmh = m - 2 * np.outer(v, mv) - 2 * np.outer(mv, v) + 4 * (v @ mv) * np.outer(v, v)
    return hmh[0, 0], np.linalg.eigvalsh(hmh[1:, 1:])[::-1]


def dbm_path(g, times, rng=None, *, w=None, mu=0.1, kappa_const=1.0, nodes=64,
             graph_seed=None, goe_seed=None):
    """Evaluate ``A(t) = e^{-t/2} A + sqrt(1 - e^{-t}) W`` at each time.

    ``A = A_graph / q`` and ``W`` is a constrained GOE draw (``w`` overrides
    it, e.g. ``w=0`` for the pure-scaling path). Since ``W e = 0``, e stays
    an exact eigenvector with eigenvalue ``e^{-t/2} d / q``; ``xi2`` is the
    largest of the remaining eigenvalues and the code checks that the
    trivial one is still on top.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0) or times[-1] > 1:
        raise DomainError("times must be increasing, start at 0 and end at most 1")
    n, d = g.n_vertices, g.degree
    q = q_param(n, d)
    a = g.adjacency(dtype=float) / q
    if w is None:
        if rng is None:
            raise DomainError("either rng or w is required")
        w = constrained_goe(n, rng)
    elif np.isscalar(w):
        if w != 0:
            raise DomainError("a scalar w must be 0 (W must annihilate e)")
        w = np.zeros((n, n))
    xi2 = np.empty(times.size)
    xt = np.empty(times.size, dtype=complex)
    top = np.empty(times.size)
    spectra = []
    for idx, t in enumerate(times):
        try:
            triv, eigs = _nontrivial_eigs(dbm_matrix(a, w, t), n)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed at t={t!r}: {exc}") from exc
        expect = math.exp(-t / 2) * d / q
        if abs(triv - expect) > 1e-8 * max(1.0, expect) or triv <= eigs[0]:
            raise NumericalError(f"trivial eigenvalue lost its place at t={t!r}")
        top[idx] = triv
        xi2[idx] = eigs[0]
        xt[idx] = x_functional(eigs, n, mu, kappa_const, nodes=nodes)
        spectra.append(eigs)
    return DbmPath(times, xi2, xt, top, graph_seed, goe_seed, tuple(spectra))
