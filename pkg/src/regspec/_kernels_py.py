"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same signatures, same in-place semantics and the same consumption of the
bit generator's raw 64-bit stream, so a chain run through either backend
visits the same states.
"""
import math

import numpy as np


def _bounded(x, m):
    return (x * m) >> 64


def run_switch_chain(bits, edges, bit_generator, n_steps):
    """Run ``n_steps`` proposals of the lazy switch chain in place.

    Returns the number of accepted switches.
    """
    two_e = 2 * edges.shape[0]
    if two_e == 0:
        return 0
    accepted = 0
    raw = bit_generator.random_raw
    # plain lists are ~20x faster than numpy scalar indexing in a Python loop
    rows = [bytearray(r.tobytes()) for r in bits]
    ed = edges.tolist()
    for _ in range(int(n_steps)):
        o1 = _bounded(int(raw()), two_e)
        o2 = _bounded(int(raw()), two_e)
        e1 = o1 >> 1
        e2 = o2 >> 1
        if o1 & 1:
            k, i = ed[e1]
        else:
            i, k = ed[e1]
        if o2 & 1:
            l, j = ed[e2]
        else:
            j, l = ed[e2]
        if i == j or i == l or k == j or k == l:
            continue
        if (rows[i][j >> 3] >> (j & 7)) & 1 or (rows[k][l >> 3] >> (l & 7)) & 1:
            continue
        for u, v, on in ((i, k, False), (j, l, False), (i, j, True), (k, l, True)):
            if on:
                rows[u][v >> 3] |= 1 << (v & 7)
                rows[v][u >> 3] |= 1 << (u & 7)
            else:
                rows[u][v >> 3] &= ~(1 << (v & 7)) & 0xFF
                rows[v][u >> 3] &= ~(1 << (u & 7)) & 0xFF
        ed[e1] = [i, j]
        ed[e2] = [k, l]
        accepted += 1
    bits[:, :] = np.frombuffer(b"".join(bytes(r) for r in rows), dtype=np.uint8).reshape(bits.shape)
    if ed:
        edges[:, :] = np.asarray(ed, dtype=edges.dtype)
    return accepted


def _sturm(diag, offsq, x, pivmin):
    count = 0
    q = diag[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for i in range(1, len(diag)):
        q = diag[i] - x - offsq[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def sturm_count(diag, offsq, x, pivmin):
    """Number of eigenvalues strictly below ``x`` of a symmetric tridiagonal."""
    return _sturm(np.asarray(diag).tolist(), np.asarray(offsq).tolist(), float(x), float(pivmin))


def tridiag_bisect(diag, offsq, indices, lo, hi, pivmin, rtol):
    """Eigenvalues with the given ascending 0-based ``indices`` by bisection."""
    d = np.asarray(diag, dtype=float).tolist()
    o = np.asarray(offsq, dtype=float).tolist()
    out = np.empty(len(indices), dtype=np.float64)
    for t, idx in enumerate(np.asarray(indices).tolist()):
        a, b = float(lo), float(hi)
        for _ in range(200):
            scale = max(abs(a), abs(b), 1.0)
            if b - a <= rtol * scale:
                break
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if _sturm(d, o, mid, pivmin) > idx:
                b = mid
            else:
                a = mid
        out[t] = 0.5 * (a + b)
    return out


def tql1(d, e, eps):
    """Implicit QL eigenvalues of a symmetric tridiagonal, in place.

    See the compiled twin for the storage convention.
    """
    n = d.shape[0]
    if n == 0:
        return 0
    dl = d.tolist()
    el = e.tolist()
    el[n - 1] = 0.0
    total = 0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(dl[m]) + abs(dl[m + 1])
                if abs(el[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            total += 1
            if sweeps > 60:
                d[:] = dl
                e[:] = el
                return -1
            g = (dl[l + 1] - dl[l]) / (2.0 * el[l])
            r = math.hypot(g, 1.0)
            g = dl[m] - dl[l] + el[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * el[i]
                b = c * el[i]
                r = math.hypot(f, g)
                el[i + 1] = r
                if r == 0.0:
                    dl[i + 1] -= p
                    el[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = dl[i + 1] - p
                r = (dl[i] - g) * s + 2.0 * c * b
                p = s * r
                dl[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            dl[l] -= p
            el[l] = g
            el[m] = 0.0
    d[:] = dl
    e[:] = el
    return total
