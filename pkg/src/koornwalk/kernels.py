"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``KOORNWALK_PURE=1`` to force the fallback and ``KOORNWALK_THREADS``
to choose the thread count of the compiled kernels. The reduction order
is fixed by ``NBLOCKS`` and does not depend on the thread count.
"""
from __future__ import annotations

import os

from . import _kernels_py

NBLOCKS = 16

try:
    if os.environ.get("KOORNWALK_PURE", "") not in ("", "0"):
        raise ImportError("pure fallback requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def threads() -> int:
    try:
        return max(1, int(os.environ.get("KOORNWALK_THREADS", "1")))
    except ValueError:
        return 1


def km_moments(x, w, p, r, q, nmax, backend=None):
    """``S[n] = sum_k w[k] Q_n(x[k])`` for ``n = 0..nmax``.

    ``Q_n`` follows ``Q_{n+1} = ((x - r_n) Q_n - q_n Q_{n-1}) / p_n`` with
    ``Q_0 = 1`` and ``Q_{-1} = 0``.
    """
    impl = _pick(backend)
    if impl is _kernels_py:
        return impl.km_moments(x, w, p, r, q, nmax, NBLOCKS)
    return impl.km_moments(x, w, p, r, q, nmax, NBLOCKS, threads())


def tridiag_evolve(mu, p, r, q, steps, lo, hi, backend=None):
    return _pick(backend).tridiag_evolve(mu, p, r, q, steps, lo, hi)


def _pick(backend):
    if backend is None:
        backend = BACKEND
    if backend == "python":
        return _kernels_py
    if backend == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")
