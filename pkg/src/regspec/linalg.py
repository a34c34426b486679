"""Dense and Krylov symmetric eigensolvers.

The default dense path is LAPACK (``numpy.linalg.eigh``). The
Householder + implicit-QL path is kept as an independent second solver used
by the tests to cross-check it.
"""
import numpy as np

from . import kernels
from .errors import NumericalError

__all__ = [
    "householder_tridiagonalize",
    "tridiagonal_eigvalsh",
    "eigvalsh_householder_ql",
    "block_lanczos_extremes",
]


def householder_tridiagonalize(a):
    """Reduce a symmetric matrix to tridiagonal form; returns ``(diag, off)``."""
    t = np.array(a, dtype=float, copy=True)
    n = t.shape[0]
    off = np.zeros(max(n - 1, 0))
    for c in range(n - 2):
        x = t[c + 1:, c]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            off[c] = 0.0
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        off[c] = alpha
        if vnorm == 0.0:
            continue
        v /= vnorm
        # two-sided reflection of the trailing block: S <- H S H, H = I - 2vv^T
        s = t[c + 1:, c + 1:]
        p = s @ v
        k = v @ p
        w = 2.0 * p - 2.0 * k * v
        s -= np.outer(v, w) + np.outer(w, v)
        t[c + 1:, c] = 0.0
        t[c, c + 1:] = 0.0
    if n >= 2:
        off[n - 2] = t[n - 1, n - 2]
    return np.diag(t).copy(), off


def tridiagonal_eigvalsh(diag, off):
    """Eigenvalues (ascending) of a symmetric tridiagonal via implicit QL."""
    d = np.array(diag, dtype=float, copy=True)
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = off
    sweeps = kernels.tql1(d, e, np.finfo(float).eps)
    if sweeps < 0:
        raise NumericalError(f"implicit QL failed to converge (n={n})")
    return np.sort(d)


def eigvalsh_householder_ql(a):
    return tridiagonal_eigvalsh(*householder_tridiagonalize(a))


def _orthonormalize(block, basis, rng, tol):
    """Orthogonalize ``block`` against ``basis`` (twice) and itself.

    Columns that vanish (Krylov breakdown) are replaced by fresh random
    directions so the block size, and hence multiplicity detection, is kept.
    """
    n, b = block.shape
    out = []
    for col in range(b):
        v = block[:, col]
        for attempt in range(5):
            for _ in range(2):
                if basis is not None and basis.shape[1]:
                    v = v - basis @ (basis.T @ v)
                for u in out:
                    v = v - u * (u @ v)
            nv = np.linalg.norm(v)
            if nv > tol:
                out.append(v / nv)
                break
            v = rng.standard_normal(n)
        else:
            return np.column_stack(out) if out else np.zeros((n, 0))
    return np.column_stack(out)


def block_lanczos_extremes(matvec, n, k, *, ortho=None, block=None, rng=None,
                           tol=1e-10, scale=1.0, max_dim=None):
    """Top-k and bottom-k eigenpairs' values of a symmetric operator restricted
    to the orthogonal complement of ``ortho``.

    Block Lanczos with full reorthogonalization and Rayleigh-Ritz on the
    whole basis. Converged when every wanted Ritz pair has residual
    ``<= tol * scale``. Returns ``(top descending, bottom ascending)``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    ortho = None if ortho is None else np.asarray(ortho, dtype=float).reshape(n, -1)
    n_eff = n - (0 if ortho is None else ortho.shape[1])
    k = min(k, n_eff)
    b = block or (k + 1)
    b = min(b, n_eff)
    max_dim = n_eff if max_dim is None else min(max_dim, n_eff)
    eps_break = 1e-10

    fixed = ortho
    vblock = _orthonormalize(rng.standard_normal((n, b)), fixed, rng, eps_break)
    basis = np.zeros((n, 0))
    abasis = np.zeros((n, 0))
    h = np.zeros((0, 0))
    while True:
        aw = matvec(vblock)
        m0 = basis.shape[1]
        basis = np.hstack([basis, vblock])
        abasis = np.hstack([abasis, aw])
        cross = basis.T @ aw
        hn = np.zeros((basis.shape[1], basis.shape[1]))
        hn[:m0, :m0] = h
        hn[:, m0:] = cross
        hn[m0:, :] = cross.T
        h = 0.5 * (hn + hn.T)
        theta, y = np.linalg.eigh(h)
        m = basis.shape[1]
        want = list(range(min(k, m))) + list(range(max(m - k, 0), m))
        yw = y[:, want]
        resid = np.linalg.norm(abasis @ yw - (basis @ yw) * theta[want], axis=0)
        if m >= max_dim or (m >= 2 * k and np.all(resid <= tol * scale)):
            if m < 2 * k and m < n_eff:
                raise NumericalError("Krylov basis smaller than requested count")
            if not np.all(resid <= max(tol, 1e-6) * scale) and m < n_eff:
                raise NumericalError(
                    f"block Lanczos did not converge: dim={m}, max residual={resid.max():.3e}")
            top = theta[::-1][:k]
            bottom = theta[:k]
            return top.copy(), bottom.copy()
        stack = basis if fixed is None else np.hstack([fixed, basis])
        room = max_dim - m
        nxt = aw - basis @ (basis.T @ aw)
        vblock = _orthonormalize(nxt[:, : min(b, room)], stack, rng, eps_break * max(scale, 1.0))
        if vblock.shape[1] == 0:
            raise NumericalError("block Lanczos could not extend the Krylov basis")
