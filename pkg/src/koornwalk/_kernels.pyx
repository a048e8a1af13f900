# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

km_moments: S[n] = sum_k w[k] Q_n(x[k]) with Q_n from a three-term
recurrence, reduced in a fixed block order so results do not depend on
the thread count.

tridiag_evolve: row-vector iteration mu <- mu P for a tridiagonal P.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF LANES = 4


cdef inline void _twosum(double* s, double* c, double v) noexcept nogil:
    # branch-free compensated add (Knuth TwoSum)
    cdef double t = s[0] + v
    cdef double z = t - s[0]
    c[0] += (s[0] - (t - z)) + (v - z)
    s[0] = t


cdef inline double _step(const double* x, double* qprev, double* qcur, Py_ssize_t k,
                         double rn, double qn, double inv_p) noexcept nogil:
    cdef double nxt = ((x[k] - rn) * qcur[k] - qn * qprev[k]) * inv_p
    qprev[k] = qcur[k]
    qcur[k] = nxt
    return nxt


cdef void _block(const double* x, const double* w, Py_ssize_t k0, Py_ssize_t k1,
                 const double* p, const double* r, const double* q, Py_ssize_t nmax,
                 double* out_s, double* out_c) noexcept nogil:
    cdef Py_ssize_t m = k1 - k0
    cdef Py_ssize_t k, n, m4
    cdef double* qprev
    cdef double* qcur
    cdef const double* xb = x + k0
    cdef const double* wb = w + k0
    cdef double s0, s1, s2, s3, c0, c1, c2, c3
    cdef double tot, comp, inv_p, rn, qn
    if m <= 0:
        for n in range(nmax + 1):
            out_s[n] = 0.0
            out_c[n] = 0.0
        return
    qprev = <double*> malloc(m * sizeof(double))
    qcur = <double*> malloc(m * sizeof(double))
    m4 = m - m % LANES
    for k in range(m):
        qprev[k] = 0.0
        qcur[k] = 1.0
    for n in range(nmax + 1):
        s0 = 0.0; s1 = 0.0; s2 = 0.0; s3 = 0.0
        c0 = 0.0; c1 = 0.0; c2 = 0.0; c3 = 0.0
        if n == 0:
            for k in range(0, m4, LANES):
                _twosum(&s0, &c0, wb[k])
                _twosum(&s1, &c1, wb[k + 1])
                _twosum(&s2, &c2, wb[k + 2])
                _twosum(&s3, &c3, wb[k + 3])
            for k in range(m4, m):
                _twosum(&s0, &c0, wb[k])
        else:
            inv_p = 1.0 / p[n - 1]
            rn = r[n - 1]
            qn = q[n - 1]
            for k in range(0, m4, LANES):
                _twosum(&s0, &c0, wb[k] * _step(xb, qprev, qcur, k, rn, qn, inv_p))
                _twosum(&s1, &c1, wb[k + 1] * _step(xb, qprev, qcur, k + 1, rn, qn, inv_p))
                _twosum(&s2, &c2, wb[k + 2] * _step(xb, qprev, qcur, k + 2, rn, qn, inv_p))
                _twosum(&s3, &c3, wb[k + 3] * _step(xb, qprev, qcur, k + 3, rn, qn, inv_p))
            for k in range(m4, m):
                _twosum(&s0, &c0, wb[k] * _step(xb, qprev, qcur, k, rn, qn, inv_p))
        tot = s0
        comp = c0
        _twosum(&tot, &comp, s1)
        _twosum(&tot, &comp, s2)
        _twosum(&tot, &comp, s3)
        out_s[n] = tot
        out_c[n] = comp + c1 + c2 + c3
    free(qprev)
    free(qcur)


def km_moments(const double[::1] x, const double[::1] w, const double[::1] p,
               const double[::1] r, const double[::1] q, Py_ssize_t nmax,
               int nblocks=16, int threads=1):
    cdef Py_ssize_t kk = x.shape[0]
    cdef Py_ssize_t b, n, nb
    if w.shape[0] != kk:
        raise ValueError("x and w differ in length")
    if p.shape[0] < nmax or r.shape[0] < nmax or q.shape[0] < nmax:
        raise ValueError("need recurrence coefficients for sites 0..nmax-1")
    nb = max(1, min(nblocks, kk))
    part_s = np.zeros((nb, nmax + 1))
    part_c = np.zeros((nb, nmax + 1))
    cdef double[:, ::1] ps = part_s
    cdef double[:, ::1] pc = part_c
    cdef const double* xp = &x[0] if kk else NULL
    cdef const double* wp = &w[0] if kk else NULL
    cdef const double* pp = &p[0] if p.shape[0] else NULL
    cdef const double* rp = &r[0] if r.shape[0] else NULL
    cdef const double* qp = &q[0] if q.shape[0] else NULL
    if kk == 0:
        return np.zeros(nmax + 1)
    for b in prange(nb, nogil=True, num_threads=threads, schedule="static"):
        _block(xp, wp, b * kk // nb, (b + 1) * kk // nb, pp, rp, qp, nmax,
               &ps[b, 0], &pc[b, 0])
    out = np.empty(nmax + 1)
    cdef double[::1] o = out
    cdef double tot, comp
    for n in range(nmax + 1):
        tot = 0.0
        comp = 0.0
        for b in range(nb):
            _twosum(&tot, &comp, ps[b, n])
            comp += pc[b, n]
        o[n] = tot + comp
    return out


def tridiag_evolve(double[::1] mu, const double[::1] p, const double[::1] r,
                   const double[::1] q, Py_ssize_t steps, Py_ssize_t lo, Py_ssize_t hi):
    """Advance ``mu`` in place by ``steps`` steps; returns the new support ``(lo, hi)``.

    Mass that would move past the last site is dropped.
    """
    cdef Py_ssize_t m = mu.shape[0] - 1
    cdef Py_ssize_t s, n, a, z
    cdef double old_prev, old_cur, t, c
    if p.shape[0] <= m or r.shape[0] <= m or q.shape[0] <= m:
        raise ValueError("coefficient arrays shorter than the state vector")
    with nogil:
        for s in range(steps):
            a = lo - 1 if lo > 0 else 0
            z = hi + 1 if hi < m else m
            old_prev = mu[a - 1] if a > 0 else 0.0
            for n in range(a, z + 1):
                old_cur = mu[n]
                t = old_cur * r[n]
                c = 0.0
                if n > 0:
                    _twosum(&t, &c, old_prev * p[n - 1])
                if n < m:
                    _twosum(&t, &c, mu[n + 1] * q[n + 1])
                mu[n] = t + c
                old_prev = old_cur
            lo = a
            hi = z
    return lo, hi
