"""Tracy-Widom (beta = 1) distribution function.

The committed table ``data/tw1_table.csv`` is produced by
:func:`generate_table` from the Fredholm determinant

    F1(s) = det(I - K) on L^2(s, inf),   K(x, y) = Ai((x + y) / 2) / 2,

discretized with Gauss-Legendre quadrature. :func:`tw1_painleve` is an
independent route through the Hastings-McLeod solution of Painleve II and
is only used to cross-check the table. Runtime lookups go through a monotone
cubic (PCHIP) interpolant and never touch special functions.
"""
import csv
import io
import json
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy import integrate, interpolate, special

__all__ = [
    "tw1_fredholm",
    "tw1_painleve",
    "generate_table",
    "write_table",
    "Tw1Table",
    "load_table",
    "tw1_cdf",
]

TABLE_LO = -10.0
TABLE_HI = 8.0
TABLE_STEP = 0.05
_CUTOFF = 30.0


@lru_cache(maxsize=8)
def _gauss_legendre(m):
    return np.polynomial.legendre.leggauss(m)


def tw1_fredholm(s, nodes=96):
    """F1(s) from the Airy-kernel Fredholm determinant."""
    s = float(s)
    if s >= _CUTOFF:
        return 1.0
    x0, w0 = _gauss_legendre(nodes)
    half = 0.5 * (_CUTOFF - s)
    x = s + half * (x0 + 1.0)
    w = half * w0
    sw = np.sqrt(w)
    k = 0.5 * special.airy(0.5 * (x[:, None] + x[None, :]))[0]
    m = np.eye(nodes) - sw[:, None] * k * sw[None, :]
    return float(np.linalg.det(m))


def tw1_painleve(s_values, s_start=8.0, rtol=1e-12, atol=1e-15):
    """F1 at ``s_values`` (each <= s_start) from Painleve II.

    State ``(q, q', I1, J, I2)`` with ``I1 = int_s^inf q``,
    ``J = int_s^inf q^2`` and ``I2 = int_s^inf (x - s) q^2``, integrated
    backwards from the Airy asymptotics at ``s_start``.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    ai, aip, _, _ = special.airy(s_start)
    tail = lambda f: integrate.quad(f, s_start, np.inf, epsabs=1e-300, limit=200)[0]
    i1 = tail(lambda x: special.airy(x)[0])
    j = tail(lambda x: special.airy(x)[0] ** 2)
    i2 = tail(lambda x: (x - s_start) * special.airy(x)[0] ** 2)

    def rhs(x, y):
        q, dq, jj = y[0], y[1], y[3]
        return [dq, x * q + 2 * q**3, -q, -q * q, -jj]

    order = np.argsort(-s_values)
    pts = s_values[order]
    if pts.size and pts[0] > s_start:
        raise ValueError("s_values must not exceed s_start")
    sol = integrate.solve_ivp(rhs, (s_start, float(pts[-1])), [ai, aip, i1, j, i2],
                              method="DOP853", t_eval=pts, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    i1_s, i2_s = sol.y[2], sol.y[4]
    f1 = np.exp(-0.5 * i1_s - 0.5 * i2_s)
    out = np.empty_like(s_values)
    out[order] = f1
    return out


def generate_table(lo=TABLE_LO, hi=TABLE_HI, step=TABLE_STEP, nodes=96):
    n = int(round((hi - lo) / step)) + 1
    s = np.round(lo + step * np.arange(n), 10)
    f = np.array([tw1_fredholm(x, nodes) for x in s])
    f = np.clip(f, 0.0, 1.0)
    if np.any(np.diff(f) < -1e-14):
        raise RuntimeError("Fredholm table is not monotone")
    return s, np.maximum.accumulate(f)


def _moments(nodes=96):
    """Mean, second moment and median straight from the Fredholm determinant."""
    cdf = lambda x: tw1_fredholm(x, nodes)
    upper = integrate.quad(lambda x: 1 - cdf(x), 0, _CUTOFF, limit=200, epsabs=1e-12)[0]
    lower = integrate.quad(cdf, TABLE_LO - 4, 0, limit=200, epsabs=1e-12)[0]
    mean = upper - lower
    m2 = (integrate.quad(lambda x: 2 * x * (1 - cdf(x)), 0, _CUTOFF, limit=200, epsabs=1e-12)[0]
          + integrate.quad(lambda x: -2 * x * cdf(x), TABLE_LO - 4, 0, limit=200, epsabs=1e-12)[0])
    from scipy.optimize import brentq

    median = brentq(lambda x: cdf(x) - 0.5, -3, 1, xtol=1e-13)
    return {"mean": mean, "variance": m2 - mean * mean, "median": median}


def write_table(directory, nodes=96):
    """Regenerate ``tw1_table.csv`` and ``tw1_meta.json`` in ``directory``."""
    from pathlib import Path

    directory = Path(directory)
    s, f = generate_table(nodes=nodes)
    with open(directory / "tw1_table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "F"])
        for a, b in zip(s, f):
            w.writerow([repr(float(a)), repr(float(b))])
    check = s[(s >= -8) & (s <= 6)]
    diff = float(np.max(np.abs(tw1_painleve(check) - f[(s >= -8) & (s <= 6)])))
    meta = {
        "method": "Fredholm determinant, Gauss-Legendre",
        "nodes": nodes,
        "cutoff": _CUTOFF,
        "grid": {"lo": TABLE_LO, "hi": TABLE_HI, "step": TABLE_STEP},
        "painleve_max_abs_diff": diff,
        **_moments(nodes),
    }
    with open(directory / "tw1_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


class Tw1Table:
    """Tabulated F1 with a monotone cubic interpolant and 0/1 clamps."""

    def __init__(self, s, f, meta=None):
        self.s = np.asarray(s, dtype=float)
        self.f = np.asarray(f, dtype=float)
        if np.any(np.diff(self.s) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.diff(self.f) < 0):
            raise ValueError("table must be non-decreasing")
        self.meta = meta or {}
        self._interp = interpolate.PchipInterpolator(self.s, self.f, extrapolate=False)

    @property
    def lo(self):
        return float(self.s[0])

    @property
    def hi(self):
        return float(self.s[-1])

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        out = np.clip(np.nan_to_num(self._interp(s), nan=0.0), 0.0, 1.0)
        out = np.where(s < self.lo, 0.0, out)
        out = np.where(s > self.hi, 1.0, out)
        return out if out.ndim else float(out)

    def mean(self):
        """Mean of the tabulated law, treating the clamped tails as point masses."""
        # E[S] = hi - int_lo^hi F ds  (the mass below lo is ~0)
        return self.hi - float(self._interp.integrate(self.lo, self.hi))

    def median(self):
        from scipy.optimize import brentq

        return brentq(lambda x: self.cdf(x) - 0.5, self.lo, self.hi, xtol=1e-12)


@lru_cache(maxsize=1)
def load_table():
    pkg = resources.files("regspec") / "data"
    text = (pkg / "tw1_table.csv").read_text()
    rows = list(csv.reader(io.StringIO(text)))[1:]
    meta_path = pkg / "tw1_meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    return Tw1Table([float(r[0]) for r in rows], [float(r[1]) for r in rows], meta)


def tw1_cdf(s):
    return load_table().cdf(s)
