"""Exact verification of the switching calculus by full enumeration.

Every expectation over the uniform d-regular measure is a finite sum over
the enumerated graphs, so polynomial functionals can be checked in integer
arithmetic. Graphs are stacked into one ``(G, N, N)`` int64 array and every
functional is evaluated on the whole stack at once.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..graph import power_row_deviation, xi_dense
from ..harness import derive_seed, utc_now
from ..sampler import ENUMERATION_LIMIT, enumerate_all
from ..spectral import q_param
from .common import make_report

SYMBOLS = ("i", "j", "k", "l")
FUNCTIONAL_LABEL = "functional"


def _matpow(a, r):
    out = a
    for _ in range(r - 1):
        out = out @ a
    return out


@dataclass(frozen=True)
class PolyFunctional:
    """Integer polynomial in adjacency entries and entries of adjacency powers.

    ``monomials`` holds ``(coef, ((x, y), ...))`` and ``powers`` holds
    ``(coef, r, x, y)`` meaning ``coef * (A^r)_xy``. A vertex may be an int
    or one of the placeholders ``i, j, k, l``, resolved by :meth:`bind`.
    """

    monomials: tuple = ()
    powers: tuple = ()
    constant: int = 0

    def bind(self, idx):
        v = lambda x: idx.get(x, x) if isinstance(x, str) else x
        mons = tuple((c, tuple((v(x), v(y)) for x, y in f)) for c, f in self.monomials)
        pows = tuple((c, r, v(x), v(y)) for c, r, x, y in self.powers)
        return PolyFunctional(mons, pows, self.constant)

    @property
    def degree(self):
        degs = [len(f) for _, f in self.monomials] + [r for _, r, _, _ in self.powers]
        return max(degs, default=0)

    def __call__(self, a):
        a = np.asarray(a)
        out = np.full(a.shape[:-2], self.constant, dtype=a.dtype)
        for c, factors in self.monomials:
            term = np.full(a.shape[:-2], c, dtype=a.dtype)
            for x, y in factors:
                term = term * a[..., x, y]
            out = out + term
        cache = {}
        for c, r, x, y in self.powers:
            if r not in cache:
                cache[r] = _matpow(a, r)
            out = out + c * cache[r][..., x, y]
        return out

    def __str__(self):
        parts = [str(self.constant)] if self.constant else []
        for c, f in self.monomials:
            parts.append(f"{c}*" + "*".join(f"A[{x},{y}]" for x, y in f))
        for c, r, x, y in self.powers:
            parts.append(f"{c}*(A^{r})[{x},{y}]")
        return " + ".join(parts) or "0"


def random_functional(n, rng, max_terms=3, max_degree=3, symbolic=0.3):
    """A random integer polynomial functional on ``N x N`` matrices."""

    def vertex():
        if rng.random() < symbolic:
            return SYMBOLS[rng.integers(4)]
        return int(rng.integers(n))

    def coef():
        c = int(rng.integers(1, 4))
        return c if rng.random() < 0.5 else -c

    mons = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        factors = []
        for _ in range(int(rng.integers(1, max_degree + 1))):
            x = vertex()
            y = vertex()
            while y == x:
                y = vertex()
            factors.append((x, y))
        mons.append((coef(), tuple(factors)))
    pows = []
    if rng.random() < 0.5:
        pows.append((coef(), int(rng.integers(2, max_degree + 1)), vertex(), vertex()))
    return PolyFunctional(tuple(mons), tuple(pows), int(rng.integers(-2, 3)))


# -- exact Taylor expansion along t -> F(A + t xi) ----------------------------

def _adjugate(v):
    """Integer adjugate and determinant of a small integer matrix."""
    m = len(v)
    det = round(np.linalg.det(np.asarray(v, dtype=float)))
    adj = np.zeros((m, m), dtype=np.int64)
    for r in range(m):
        for c in range(m):
            minor = np.delete(np.delete(np.asarray(v, dtype=float), r, 0), c, 1)
            adj[c, r] = (-1) ** (r + c) * (round(np.linalg.det(minor)) if m > 1 else 1)
    return adj, det


def _poly_coeffs(values):
    """Scaled coefficients ``det * c_s`` of the interpolant through t = 0..p."""
    p = values.shape[0] - 1
    vander = [[t**s for s in range(p + 1)] for t in range(p + 1)]
    adj, det = _adjugate(vander)
    return adj @ values, det


def _remainder_range(c, order):
    """Range of ``g^(order+1)(theta)/(order+1)!`` over theta in [0, 1], per column."""
    p = c.shape[0] - 1
    h = np.zeros((p - order, c.shape[1]))
    for s in range(order + 1, p + 1):
        h[s - order - 1] = math.comb(s, order + 1) * c[s]
    thetas = np.linspace(0.0, 1.0, 2001)
    vals = np.polynomial.polynomial.polyval(thetas, h)  # (G, thetas)
    return vals.min(axis=-1), vals.max(axis=-1)


def taylor_check(f, a, xi, q, order, fd_step=1e-4):
    """Exact Taylor expansion of ``F(A + xi) - F(A)`` in ``q d/dt`` up to ``order``.

    Returns ``(exact_ok, remainder_ok, fd_err)``. With ``order >= deg F`` the
    truncated sum equals the discrete derivative exactly; below that the
    remainder must lie in the Lagrange range. ``fd_err`` compares the first
    derivative against a central finite difference of the float extension.
    """
    p = max(f.degree, 1)
    values = np.stack([f(a + t * xi) for t in range(p + 1)])
    scaled, det = _poly_coeffs(values)
    diff = values[1] - values[0]
    # q factors cancel: (q d/dt)^s / (q^s s!) = d^s/dt^s / s!
    full_ok = bool(np.all(scaled[1:].sum(axis=0) == det * diff))
    c = scaled / det
    if order >= p:
        rem_ok = full_ok
    else:
        rem = diff - c[1:order + 1].sum(axis=0)
        lo, hi = _remainder_range(c, order)
        tol = 1e-9 * (1 + np.abs(rem))
        rem_ok = bool(np.all((rem >= lo - tol) & (rem <= hi + tol)))
    af, xf = a.astype(float), xi.astype(float)
    fd = q * (f(af + fd_step * xf) - f(af - fd_step * xf)) / (2 * fd_step)
    fd_err = float(np.max(np.abs(fd - q * c[1])) / (1 + np.max(np.abs(q * c[1]))))
    return full_ok, rem_ok, fd_err


# -- the individual identities ------------------------------------------------

def switching_identity(f, a, quads):
    """Max integer gap between the two sides of the switching symmetry, and its float version."""
    n, count = a.shape[-1], a.shape[0]
    worst, worst_float = 0, 0.0
    for i, j, k, l in quads:
        fb = f.bind({"i": i, "j": j, "k": k, "l": l})
        lhs_chi = a[:, i, j] * (1 - a[:, i, k]) * a[:, k, l] * (1 - a[:, j, l])
        rhs_chi = a[:, i, k] * (1 - a[:, i, j]) * a[:, j, l] * (1 - a[:, k, l])
        lhs = int(np.sum(fb(a) * lhs_chi))
        rhs = int(np.sum(fb(a + xi_dense(n, i, j, k, l)) * rhs_chi))
        worst = max(worst, abs(lhs - rhs))
        worst_float = max(worst_float, abs(lhs / count - rhs / count))
    return worst, worst_float


def chains(fv, a, i, j, d):
    """Per-graph integer check of the two identity chains for the pair (i, j)."""
    n = a.shape[-1]
    one = 1 - a
    aij, akl = a[:, i, j], a
    oik = one[:, i, :]
    base = aij[:, None, None] * oik[:, :, None] * akl  # A_ij (1-A_ik) A_kl over (k, l)
    ajl = a[:, j, None, :]
    s1 = (n - d) * d * aij * fv
    s2 = base.sum(axis=(1, 2)) * fv
    s_chi = (base * (1 - ajl)).sum(axis=(1, 2)) * fv
    s_rest = (base * ajl).sum(axis=(1, 2)) * fv
    ok_edge = np.array_equal(s1, s2) and np.array_equal(s2, s_chi + s_rest)

    oij = one[:, i, j][:, None, None]
    aik = a[:, i, :, None]
    l1 = (oij * aik * (1 - akl) * ajl).sum(axis=(1, 2)) * fv
    l2 = (-(oij * oik[:, :, None] * (1 - akl) * ajl).sum(axis=(1, 2)) + (n - d) * d * one[:, i, j]) * fv
    l3 = (oij * oik[:, :, None] * akl * ajl).sum(axis=(1, 2)) * fv
    ok_nonedge = np.array_equal(l1, l2) and np.array_equal(l2, l3)
    return bool(ok_edge), bool(ok_nonedge)


def remainder_constant(f, a, i, j, d):
    """Measured remainder constant ``C = N |R| / E[M_ij(F)]`` (all k, l and feasible only)."""
    n, count = a.shape[-1], a.shape[0]
    fv = f(a)
    a3 = _matpow(a, 3)[:, i, j]
    main = 0
    m_all = np.zeros(count, dtype=np.int64)
    m_feas = np.zeros(count, dtype=np.int64)
    for k in range(n):
        for l in range(n):
            x = xi_dense(n, i, j, k, l)
            b = a + x
            fb = f(b)
            chi = a[:, i, k] * (1 - a[:, i, j]) * a[:, j, l] * (1 - a[:, k, l])
            main += int(np.sum(chi * (fb - fv)))
            m_all = np.maximum(m_all, np.abs(fb))
            ok = np.all((b == 0) | (b == 1), axis=(1, 2)) & np.all(np.diagonal(b, axis1=1, axis2=2) == 0, axis=1)
            m_feas = np.where(ok, np.maximum(m_feas, np.abs(fb)), m_feas)
    nd = (n - d) * d
    # N-scaled sums: nd * E[A_ij F] = main + d^2 E[F] - E[(A^3)_ij F] + nd * R
    rem_scaled = nd * int(np.sum(a[:, i, j] * fv)) - main - d * d * int(np.sum(fv)) + int(np.sum(a3 * fv))
    r = rem_scaled / (nd * count)
    out = []
    for m in (m_all, m_feas):
        em = m.mean()
        out.append(n * abs(r) / em if em > 0 else (0.0 if r == 0 else math.inf))
    return r, out[0], out[1]


def product_rule(f, k, a, quads):
    n = a.shape[-1]
    for i, j, kk, l in quads:
        idx = {"i": i, "j": j, "k": kk, "l": l}
        fb, kb = f.bind(idx), k.bind(idx)
        b = a + xi_dense(n, i, j, kk, l)
        f0, f1, k0, k1 = fb(a), fb(b), kb(a), kb(b)
        df, dk = f1 - f0, k1 - k0
        if not np.array_equal(f1 * k1 - f0 * k0, df * k0 + f0 * dk + df * dk):
            return False
    return True


def power_checks(graphs, max_power):
    """Row sums of A^r and the Cauchy-Schwarz inequality with its nonnegativity."""
    sums_ok = cs_ok = nonneg_ok = True
    worst_slack = math.inf
    for g in graphs:
        n, d = g.n_vertices, g.degree
        a = g.adjacency().astype(np.int64)
        for r in range(1, max_power + 1):
            ar = _matpow(a, r)
            sums_ok &= bool(np.all(ar.sum(axis=1) == d**r))
            for i in range(n):
                dev = power_row_deviation(g, r, i)
                lhs = sum(abs(n * int(x) - d**r) for x in ar[i]) ** 2
                rhs = n * n * dev.scaled_excess
                nonneg_ok &= dev.scaled_excess >= 0
                cs_ok &= lhs <= rhs
                worst_slack = min(worst_slack, rhs - lhs)
    return sums_ok, cs_ok, nonneg_ok, worst_slack


COLUMNS = [
    "functional", "seed", "degree", "description", "identity_max_gap", "identity_max_float",
    "chain_edge_ok", "chain_nonedge_ok", "remainder_max", "remainder_c_all", "remainder_c_feasible",
    "product_rule_ok", "taylor_exact_ok", "taylor_remainder_ok", "taylor_fd_err", "status",
]


def verify_switching(cfg):
    started = utc_now()
    n, d = cfg.n, cfg.d
    graphs = enumerate_all(n, d, ENUMERATION_LIMIT)
    a = np.stack([g.adjacency().astype(np.int64) for g in graphs])
    q = q_param(n, d) if 0 < d < n - 1 else 1.0
    quads = [t for t in itertools.permutations(range(n), 4)]
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    fixed_kl = {"k": n - 2, "l": n - 1} if n >= 2 else {}
    functionals = []
    for t in range(cfg["n_functionals"]):
        seed = derive_seed(cfg.seed, t, FUNCTIONAL_LABEL)
        functionals.append((seed, random_functional(n, np.random.default_rng(seed))))
    order = cfg["taylor_order"]
    rows = []
    for t, (seed, f) in enumerate(functionals):
        gap, gap_float = switching_identity(f, a, quads)
        ok_edge = ok_nonedge = True
        rem_max, c_all, c_feas = 0.0, 0.0, 0.0
        for i, j in pairs:
            fb = f.bind({"i": i, "j": j, **fixed_kl})
            c6, c8 = chains(fb(a), a, i, j, d)
            ok_edge &= c6
            ok_nonedge &= c8
            r, ca, cf = remainder_constant(fb, a, i, j, d)
            rem_max = max(rem_max, abs(r))
            c_all, c_feas = max(c_all, ca), max(c_feas, cf)
        other = functionals[(t + 1) % len(functionals)][1]
        prod_ok = product_rule(f, other, a, quads)
        exact_ok = rem_ok = True
        fd_err = 0.0
        for i, j, k, l in quads:
            fb = f.bind({"i": i, "j": j, "k": k, "l": l})
            e, rk, fe = taylor_check(fb, a, xi_dense(n, i, j, k, l), q, order)
            exact_ok &= e
            rem_ok &= rk
            fd_err = max(fd_err, fe)
        rows.append([t, seed, f.degree, str(f), gap, gap_float, ok_edge, ok_nonedge, rem_max, c_all, c_feas,
                     prod_ok, exact_ok, rem_ok, fd_err, "ok"])
    sums_ok, cs_ok, nonneg_ok, slack = power_checks(graphs, cfg["max_power"])
    col = lambda name: [r[COLUMNS.index(name)] for r in rows]
    c_all = col("remainder_c_all")
    c_feas = col("remainder_c_feasible")
    summary = {
        "graphs": len(graphs),
        "quadruples": len(quads),
        "functionals": len(rows),
        "identity_exact": all(g == 0 for g in col("identity_max_gap")),
        "identity_max_float": max(col("identity_max_float"), default=0.0),
        "chain_edge_exact": all(col("chain_edge_ok")),
        "chain_nonedge_exact": all(col("chain_nonedge_ok")),
        "remainder_c_all_max": max(c_all, default=0.0),
        "remainder_c_feasible_max": max(c_feas, default=0.0),
        "remainder_c_all_spread": (max(c_all) / min(c_all)) if c_all and min(c_all) > 0 else None,
        "remainder_formula": "C = N |R| / E[max_kl |F(A + xi_ij^kl)|]",
        "power_row_sums_exact": sums_ok,
        "cauchy_schwarz_holds": cs_ok,
        "diagonal_excess_nonnegative": nonneg_ok,
        "cauchy_schwarz_min_slack": slack if math.isfinite(slack) else None,
        "max_power": cfg["max_power"],
        "product_rule_exact": all(col("product_rule_ok")),
        "taylor_order": order,
        "taylor_exact": all(col("taylor_exact_ok")),
        "taylor_remainder_in_range": all(col("taylor_remainder_ok")),
        "taylor_fd_max_err": max(col("taylor_fd_err"), default=0.0),
    }
    return make_report(cfg, COLUMNS, rows, summary, started)
