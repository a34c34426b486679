# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Every function here has a line-for-line twin in ``_kernels_py.py``; the two
must produce identical results (including identical RNG consumption), which
the test-suite checks.
"""
from libc.math cimport fabs, sqrt, hypot, copysign
from libc.stdint cimport uint8_t, uint64_t, int32_t, int64_t
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t

import numpy as np

cdef extern from *:
    """
    static inline uint64_t regspec_bounded(uint64_t x, uint64_t m) {
        return (uint64_t)(((unsigned __int128)x * (unsigned __int128)m) >> 64);
    }
    """
    uint64_t regspec_bounded(uint64_t x, uint64_t m) nogil


cdef inline int _bit(uint8_t[:, ::1] bits, Py_ssize_t u, Py_ssize_t v) noexcept nogil:
    return (bits[u, v >> 3] >> (v & 7)) & 1


cdef inline void _set(uint8_t[:, ::1] bits, Py_ssize_t u, Py_ssize_t v) noexcept nogil:
    bits[u, v >> 3] |= <uint8_t>(1 << (v & 7))
    bits[v, u >> 3] |= <uint8_t>(1 << (u & 7))


cdef inline void _clear(uint8_t[:, ::1] bits, Py_ssize_t u, Py_ssize_t v) noexcept nogil:
    bits[u, v >> 3] &= <uint8_t>(~(1 << (v & 7)))
    bits[v, u >> 3] &= <uint8_t>(~(1 << (u & 7)))


def run_switch_chain(uint8_t[:, ::1] bits, int32_t[:, ::1] edges, bit_generator,
                     int64_t n_steps):
    """Run ``n_steps`` proposals of the lazy switch chain in place.

    Returns the number of accepted switches.
    """
    cdef bitgen_t *rng
    cdef const char *name = "BitGenerator"
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, name):
        raise ValueError("invalid bit generator capsule")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, name)

    cdef uint64_t two_e = 2 * <uint64_t>edges.shape[0]
    cdef int64_t step, accepted = 0
    cdef uint64_t o1, o2
    cdef Py_ssize_t e1, e2, i, j, k, l
    if two_e == 0:
        return 0
    with bit_generator.lock:
      with nogil:
        for step in range(n_steps):
            o1 = regspec_bounded(rng.next_uint64(rng.state), two_e)
            o2 = regspec_bounded(rng.next_uint64(rng.state), two_e)
            e1 = <Py_ssize_t>(o1 >> 1)
            e2 = <Py_ssize_t>(o2 >> 1)
            if o1 & 1:
                i = edges[e1, 1]; k = edges[e1, 0]
            else:
                i = edges[e1, 0]; k = edges[e1, 1]
            if o2 & 1:
                j = edges[e2, 1]; l = edges[e2, 0]
            else:
                j = edges[e2, 0]; l = edges[e2, 1]
            if i == j or i == l or k == j or k == l:
                continue
            if _bit(bits, i, j) or _bit(bits, k, l):
                continue
            _clear(bits, i, k)
            _clear(bits, j, l)
            _set(bits, i, j)
            _set(bits, k, l)
            edges[e1, 0] = <int32_t>i; edges[e1, 1] = <int32_t>j
            edges[e2, 0] = <int32_t>k; edges[e2, 1] = <int32_t>l
            accepted += 1
    return accepted


cdef Py_ssize_t _sturm(const double[::1] diag, const double[::1] offsq,
                       double x, double pivmin) noexcept nogil:
    cdef Py_ssize_t n = diag.shape[0], i, count = 0
    cdef double q = diag[0] - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for i in range(1, n):
        q = diag[i] - x - offsq[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def sturm_count(const double[::1] diag, const double[::1] offsq, double x,
                double pivmin):
    """Number of eigenvalues strictly below ``x`` of a symmetric tridiagonal."""
    return _sturm(diag, offsq, x, pivmin)


def tridiag_bisect(const double[::1] diag, const double[::1] offsq,
                   const int64_t[::1] indices, double lo, double hi,
                   double pivmin, double rtol):
    """Eigenvalues with the given ascending 0-based ``indices`` by bisection."""
    cdef Py_ssize_t m = indices.shape[0], t, it
    cdef int64_t idx
    cdef double a, b, mid, scale
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for t in range(m):
            idx = indices[t]
            a = lo
            b = hi
            for it in range(200):
                scale = fabs(a) if fabs(a) > fabs(b) else fabs(b)
                if scale < 1.0:
                    scale = 1.0
                if b - a <= rtol * scale:
                    break
                mid = 0.5 * (a + b)
                if mid <= a or mid >= b:
                    break
                if _sturm(diag, offsq, mid, pivmin) > idx:
                    b = mid
                else:
                    a = mid
            res[t] = 0.5 * (a + b)
    return out


def tql1(double[::1] d, double[::1] e, double eps):
    """Implicit QL eigenvalues of a symmetric tridiagonal, in place.

    ``d`` holds the diagonal, ``e[i]`` couples rows ``i`` and ``i + 1``
    (``e[n - 1]`` is scratch). Returns the number of sweeps used, or -1 if an
    eigenvalue failed to converge within 60 sweeps.
    """
    cdef Py_ssize_t n = d.shape[0], l, m, i
    cdef int sweeps, total = 0
    cdef double g, r, s, c, p, f, b, dd
    cdef bint underflow, failed = False
    if n == 0:
        return 0
    e[n - 1] = 0.0
    with nogil:
        for l in range(n):
            if failed:
                break
            sweeps = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= eps * dd:
                        break
                    m += 1
                if m == l:
                    break
                sweeps += 1
                total += 1
                if sweeps > 60:
                    failed = True
                    break
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                underflow = False
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        underflow = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    i -= 1
                if underflow:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return -1 if failed else total
