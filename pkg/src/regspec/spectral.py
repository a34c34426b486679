"""Spectra, the projected Green function and the local-law functionals.

Conventions: ``q = sqrt(d (N - d) / N)``, ``e = N^{-1/2} (1, ..., 1)`` and
``G(z) = P (A/q - z)^{-1} P`` with ``P = I - e e^T``. Eigenvalues are
descending unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .linalg import block_lanczos_extremes, eigvalsh_householder_ql

__all__ = [
    "q_param",
    "SpectralPoint",
    "SpectralDomain",
    "semicircle_m",
    "full_spectrum",
    "extreme_eigs",
    "GreenEvaluator",
    "GreenSnapshot",
    "green",
    "ward_residual",
    "LawError",
    "entrywise_law_error",
    "self_consistent_matrix",
    "self_consistent_residual_entry",
    "self_consistent_residual_avg",
    "delocalization",
    "power_green_check",
    "window_count",
    "EdgeSample",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 8192


def q_param(n, d):
    if not 1 <= d <= n - 1:
        raise DomainError(f"need 1 <= d <= N-1, got N={n}, d={d}")
    return math.sqrt(d * (n - d) / n)


@dataclass(frozen=True)
class SpectralPoint:
    energy: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"eta must be positive, got {self.eta}")

    @property
    def z(self):
        return complex(self.energy, self.eta)

    @property
    def kappa(self):
        return abs(self.energy**2 - 4.0)


def _as_z(z):
    if isinstance(z, SpectralPoint):
        return z.z
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"Im z must be positive, got {z}")
    return z


@dataclass(frozen=True)
class SpectralDomain:
    """A finite grid inside one of the two spectral domains.

    ``kind="bulk"``: ``|E| <= 1/delta``, ``N^{-1+delta} <= eta <= 1/delta``.
    ``kind="edge"``: ``2 + N^{-2/3+delta} <= E <= 1/delta``,
    ``N^{-2/3} <= eta <= 1/delta``.
    """

    n: int
    delta: float
    kind: str
    points: tuple = field(repr=False)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        for p in self.points:
            if not self.contains(p):
                raise DomainError(f"{p} lies outside the {self.kind} domain")

    def contains(self, p, rtol=1e-12):
        n, dl = self.n, self.delta
        hi = 1.0 / dl * (1 + rtol)
        if self.kind == "bulk":
            return abs(p.energy) <= hi and n ** (-1 + dl) * (1 - rtol) <= p.eta <= hi
        if self.kind == "edge":
            return (2 + n ** (-2 / 3 + dl) * (1 - rtol) <= p.energy <= hi
                    and n ** (-2 / 3) * (1 - rtol) <= p.eta <= hi)
        raise DomainError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def bulk(cls, n, delta=0.1, n_energy=8, n_eta=5, e_max=3.0):
        energies = np.linspace(-min(e_max, 1 / delta), min(e_max, 1 / delta), n_energy)
        etas = np.geomspace(n ** (-1 + delta), 1 / delta, n_eta)
        pts = tuple(SpectralPoint(float(E), float(h)) for E in energies for h in etas)
        return cls(n, delta, "bulk", pts)

    @classmethod
    def edge(cls, n, delta=0.1, n_energy=5, n_eta=4, e_span=1.0, eta_max=1.0):
        lo = n ** (-2 / 3 + delta)
        energies = 2 + np.geomspace(lo, max(lo, min(e_span, 1 / delta - 2)), n_energy)
        etas = np.geomspace(n ** (-2 / 3), min(eta_max, 1 / delta), n_eta)
        pts = tuple(SpectralPoint(float(E), float(h)) for E in energies for h in etas)
        return cls(n, delta, "edge", pts)


def semicircle_m(z):
    """Stieltjes transform of the semicircle law: the root of 1 + z m + m^2 = 0 with Im m > 0."""
    z = _as_z(z)
    # product of principal roots gives the branch with m ~ -1/z at infinity;
    # m = -2 / (z + s) avoids the cancellation in (-z + s) / 2, and |z + s| >= 2
    s = np.sqrt(z - 2) * np.sqrt(z + 2)
    return complex(-2.0 / (z + s))


def _dense_adjacency(g):
    if g.n_vertices > DENSE_LIMIT:
        raise DomainError(f"N={g.n_vertices} exceeds the dense budget {DENSE_LIMIT}")
    return g.adjacency(dtype=float)


def full_spectrum(g, method="lapack"):
    """All eigenvalues of the adjacency matrix, descending.

    ``method="householder-ql"`` uses the in-package tridiagonal QL solver.
    """
    a = _dense_adjacency(g)
    try:
        if method == "lapack":
            w = np.linalg.eigvalsh(a)
        elif method == "householder-ql":
            w = eigvalsh_householder_ql(a)
        else:
            raise DomainError(f"unknown method {method!r}")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense eigensolver failed (N={g.n_vertices}): {exc}") from exc
    return w[::-1].copy()


def extreme_eigs(g, k, rng=None, tol=1e-10):
    """``(lambda_2..lambda_{k+1}, lambda_N..lambda_{N-k+1})`` by block Lanczos on the complement of e."""
    if not 1 <= k <= 16:
        raise DomainError("k must lie in [1, 16]")
    n, d = g.n_vertices, g.degree
    s = g.to_sparse().astype(float)
    e = np.full(n, 1 / math.sqrt(n))
    return block_lanczos_extremes(lambda v: s @ v, n, k, ortho=e, rng=rng, tol=tol,
                                  scale=max(d, 1))


def _reflector(n):
    """Unit v with (I - 2 v v^T) e = e_1."""
    v = np.full(n, 1 / math.sqrt(n))
    v[0] -= 1.0
    return v / np.linalg.norm(v)


class GreenEvaluator:
    """Eigendecomposition of A/q on the complement of e.

    ``eigenvalues`` are the N-1 nontrivial eigenvalues of A/q (descending)
    and ``vectors`` the matching orthonormal eigenvectors, all orthogonal to
    e. Built once; evaluation at any z is then O(N^2) per full matrix.
    """

    def __init__(self, g):
        n, d = g.n_vertices, g.degree
        if n < 2:
            raise DomainError("need N >= 2")
        self.n, self.d = n, d
        self.q = q_param(n, d)
        a = _dense_adjacency(g)
        self.adjacency = a
        v = _reflector(n)
        av = a @ v
        # H A H with H = I - 2 v v^T; its first row/column is (d, 0, ..., 0)
        hah = a - 2 * np.outer(v, av) - 2 * np.outer(av, v) + 4 * (v @ av) * np.outer(v, v)
        try:
            w, y = np.linalg.eigh(hah[1:, 1:] / self.q)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed (N={n}): {exc}") from exc
        w, y = w[::-1], y[:, ::-1]
        full = np.zeros((n, n - 1))
        full[1:] = y
        self.eigenvalues = w
        self.vectors = full - 2 * np.outer(v, v @ full)

    def resolvent_weights(self, z):
        return 1.0 / (self.eigenvalues - _as_z(z))

    def matrix(self, z):
        u = self.vectors
        w = self.resolvent_weights(z)
        # two real products are about twice as fast as one complex product
        g = np.empty((self.n, self.n), dtype=complex)
        g.real = (u * w.real) @ u.T
        g.imag = (u * w.imag) @ u.T
        return g

    def column(self, z, j):
        u = self.vectors
        return u @ (self.resolvent_weights(z) * u[j])

    def entry(self, z, x, y):
        u = self.vectors
        return complex(np.sum(u[x] * u[y] * self.resolvent_weights(z)))

    def gbar(self, z):
        return complex(np.sum(self.resolvent_weights(z)) / self.n)

    def at(self, z):
        return GreenSnapshot(self, _as_z(z))


class GreenSnapshot:
    """G at a fixed z; the full matrix is built lazily."""

    def __init__(self, evaluator, z):
        self.evaluator = evaluator
        self.z = z
        self._g = None

    @property
    def matrix(self):
        if self._g is None:
            self._g = self.evaluator.matrix(self.z)
        return self._g

    @property
    def gbar(self):
        return self.evaluator.gbar(self.z)

    def __getitem__(self, xy):
        x, y = xy
        if self._g is not None:
            return complex(self._g[x, y])
        return self.evaluator.entry(self.z, x, y)


def green(g, z):
    return GreenEvaluator(g).at(z)


def ward_residual(ge, z, j):
    """``|sum_i |G_ij|^2 - Im G_jj / eta|``."""
    z = _as_z(z)
    col = ge.column(z, j)
    return abs(float(np.sum(np.abs(col) ** 2)) - col[j].imag / z.imag)


@dataclass(frozen=True)
class LawError:
    error: float
    bound_weak: float
    bound_strong: float

    weak_formula = "(N*eta)^(-1/4) + d^(-1/4)"
    strong_formula = "(N*eta)^(-1/2) + d^(-1/2)"


def entrywise_law_error(ge, z):
    """``max_ij |G_ij - delta_ij m|`` with the two displayed bounds."""
    z = _as_z(z)
    gm = ge.matrix(z)
    gm[np.diag_indices_from(gm)] -= semicircle_m(z)
    err = float(np.max(np.abs(gm)))
    ne = ge.n * z.imag
    return LawError(err, ne**-0.25 + ge.d**-0.25, ne**-0.5 + ge.d**-0.5)


def self_consistent_matrix(ge, z):
    """``P_ij = delta_ij + z G_ij + Gbar G_ij``."""
    z = _as_z(z)
    gm = ge.matrix(z)
    p = (z + ge.gbar(z)) * gm
    p[np.diag_indices_from(p)] += 1.0
    return p


def self_consistent_residual_entry(ge, z):
    return float(np.max(np.abs(self_consistent_matrix(ge, z))))


def self_consistent_residual_avg(ge, z):
    z = _as_z(z)
    gb = ge.gbar(z)
    return abs(1 + z * gb + gb * gb)


def delocalization(ge):
    """Largest sup-norm over all eigenvectors (the trivial one included)."""
    return max(float(np.max(np.abs(ge.vectors))), 1 / math.sqrt(ge.n))


def power_green_check(ge, z, r):
    """``max|(A^r G)_ij| / ((d^{r/2} + d^{r-3/2}) max|G_ij|)``."""
    if not 1 <= r <= 4:
        raise DomainError("r must lie in [1, 4]")
    z = _as_z(z)
    if abs(z) > 10:
        raise DomainError("|z| must be at most 10")
    u = ge.vectors
    w = ge.resolvent_weights(z)
    # A u_i = q lambda_i u_i, so A^r G = U diag((q lambda)^r w) U^T
    agr = (u * ((ge.q * ge.eigenvalues) ** r * w)) @ u.T
    gmax = float(np.max(np.abs((u * w) @ u.T)))
    d = ge.d
    return float(np.max(np.abs(agr))) / ((d ** (r / 2) + d ** (r - 1.5)) * gmax)


def _nontrivial_scaled(source):
    if isinstance(source, GreenEvaluator):
        return source.eigenvalues
    g = source
    w = full_spectrum(g)
    return w[1:] / q_param(g.n_vertices, g.degree)


def window_count(source, a, b):
    """Number of nontrivial eigenvalues of A/q in ``[a, b]``.

    ``source`` is a graph or a :class:`GreenEvaluator`.
    """
    if not a < b:
        raise DomainError("need a < b")
    w = _nontrivial_scaled(source)
    return int(np.count_nonzero((w >= a) & (w <= b)))


@dataclass(frozen=True)
class EdgeSample:
    n: int
    d: int
    k: int
    q: float
    lambda_1: float
    lambda_2: float
    lambda_k: float
    lambda_n: float
    lambda_n_minus_k: float
    delocalization: float = float("nan")
    seed: int = 0

    @classmethod
    def from_spectrum(cls, spectrum, n, d, k, seed=0, deloc=float("nan")):
        """Build from the full descending spectrum; checks lambda_1 = d."""
        w = np.asarray(spectrum, dtype=float)
        if abs(w[0] - d) > 1e-8 * max(d, 1):
            raise NumericalError(f"top eigenvalue {w[0]!r} differs from d={d}")
        if not 2 <= k < n:
            raise DomainError("need 2 <= k < N")
        return cls(n, d, k, q_param(n, d), float(d), float(w[1]), float(w[k - 1]),
                   float(w[n - 1]), float(w[n - k - 1]), deloc, seed)

    @property
    def edge_top(self):
        return self.n ** (2 / 3) * (self.lambda_2 / self.q - 2)

    @property
    def edge_bottom(self):
        return self.n ** (2 / 3) * (self.lambda_n / self.q + 2)

    @property
    def rigidity_max(self):
        """``N^{2/3} max(|l2/q - 2|, |lk/q - 2|, |lN/q + 2|)``."""
        q = self.q
        return self.n ** (2 / 3) * max(abs(self.lambda_2 / q - 2), abs(self.lambda_k / q - 2),
                                       abs(self.lambda_n / q + 2))

    @property
    def rigidity_sum(self):
        q = self.q
        return self.n ** (2 / 3) * (abs(self.lambda_2 / q - 2) + abs(self.lambda_k / q - 2)
                                    + abs(self.lambda_n / q + 2) + abs(self.lambda_n_minus_k / q + 2))
