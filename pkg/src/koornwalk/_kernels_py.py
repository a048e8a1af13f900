"""numpy fallback for the compiled kernels.

Same block layout as the compiled code. Inside a block the sum is numpy's
pairwise sum rather than TwoSum, so results agree with the compiled kernel
to roundoff but not bitwise. Blocks are combined exactly with ``math.fsum``.
"""
from __future__ import annotations

import math

import numpy as np


def km_moments(x, w, p, r, q, nmax, nblocks=16, threads=1):
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    kk = x.size
    if w.size != kk:
        raise ValueError("x and w differ in length")
    if min(len(p), len(r), len(q)) < nmax:
        raise ValueError("need recurrence coefficients for sites 0..nmax-1")
    out = np.zeros(nmax + 1)
    if kk == 0:
        return out
    nb = max(1, min(nblocks, kk))
    starts = np.array([b * kk // nb for b in range(nb)])
    qprev = np.zeros(kk)
    qcur = np.ones(kk)
    for n in range(nmax + 1):
        if n > 0:
            nxt = ((x - r[n - 1]) * qcur - q[n - 1] * qprev) / p[n - 1]
            qprev, qcur = qcur, nxt
        out[n] = math.fsum(np.add.reduceat(w * qcur, starts))
    return out


def tridiag_evolve(mu, p, r, q, steps, lo, hi):
    m = mu.size - 1
    if min(len(p), len(r), len(q)) <= m:
        raise ValueError("coefficient arrays shorter than the state vector")
    p, r, q = np.asarray(p), np.asarray(r), np.asarray(q)
    for _ in range(steps):
        a = max(lo - 1, 0)
        z = min(hi + 1, m)
        n = np.arange(a, z + 1)
        base = max(a - 1, 0)
        old = mu[base : min(z + 2, m + 1)].copy()
        cur = old[n - base]
        new = cur * r[n]
        has_down = n > 0
        new[has_down] += old[n[has_down] - 1 - base] * p[n[has_down] - 1]
        has_up = n < m
        new[has_up] += old[n[has_up] + 1 - base] * q[n[has_up] + 1]
        mu[a : z + 1] = new
        lo, hi = a, z
    return lo, hi
