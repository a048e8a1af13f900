"""Classical Jacobi and Chebyshev polynomials, Pochhammer symbols, sup norms.

Jacobi polynomials use the classical normalization
``P_n^{(a,b)}(1) = (a+1)_n / n!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammasgn


@dataclass(frozen=True)
class JacobiParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ValueError(
                f"Jacobi exponents must exceed -1, got alpha={self.alpha}, beta={self.beta}"
            )


class PolyValue(NamedTuple):
    value: float | np.ndarray
    derivative: float | np.ndarray | None = None


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``x (x+1) ... (x+n-1)``; ``(x)_0 = 1``.

    Raises OverflowError when the product leaves the double range; use
    :func:`log_pochhammer` there.
    """
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1.0
    for k in range(n):
        out *= x + k
        if math.isinf(out):
            raise OverflowError(f"({x})_{n} overflows a double; use log_pochhammer")
    return out


def log_pochhammer(x: float, n: int) -> tuple[float, float]:
    """Return ``(log|(x)_n|, sign)``. Sign is 0 when the product vanishes."""
    if n < 0:
        raise ValueError("log_pochhammer needs n >= 0")
    if n == 0:
        return 0.0, 1.0
    if x <= 0 and x == math.floor(x) and x + n - 1 >= 0:
        return -math.inf, 0.0
    if x > 0:
        return math.lgamma(x + n) - math.lgamma(x), 1.0
    sign = float(gammasgn(x + n) * gammasgn(x))
    return math.lgamma(x + n) - math.lgamma(x), sign


def jacobi_table(alpha: float, beta: float, nmax: int, x) -> np.ndarray:
    """All of ``P_0 .. P_nmax`` at ``x``; shape ``(nmax+1,) + shape(x)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    a, b = alpha, beta
    out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    for n in range(1, nmax):
        s = 2.0 * n + a + b
        c0 = 2.0 * (n + 1) * (n + a + b + 1) * s
        c1 = (s + 1) * (s + 2) * s
        c2 = (s + 1) * (a * a - b * b)
        c3 = 2.0 * (n + a) * (n + b) * (s + 2)
        out[n + 1] = ((c1 * x + c2) * out[n] - c3 * out[n - 1]) / c0
    return out


def jacobi_derivative_tables(alpha: float, beta: float, nmax: int, x, order: int = 1):
    """Tables of ``P_n``, ``P_n'`` (and ``P_n''`` if ``order == 2``) for n <= nmax.

    Derivatives come from the degree-lowering identity
    ``d/dx P_n^{(a,b)} = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}``.
    """
    x = np.asarray(x, dtype=float)
    tables = [jacobi_table(alpha, beta, nmax, x)]
    n = np.arange(nmax + 1, dtype=float).reshape((-1,) + (1,) * x.ndim)
    for k in range(1, order + 1):
        d = np.zeros_like(tables[0])
        if nmax >= k:
            low = jacobi_table(alpha + k, beta + k, nmax - k, x)
            scale = np.ones_like(n[k:])
            for m in range(k):
                scale = scale * (n[k:] + alpha + beta + 1 + m) / 2.0
            d[k:] = scale * low
        tables.append(d)
    return tuple(tables)


def jacobi_eval(params: JacobiParams, n: int, x, derivative: bool = False) -> PolyValue:
    if n < 0:
        raise ValueError("degree must be nonnegative")
    value = jacobi_table(params.alpha, params.beta, n, x)[n]
    deriv = None
    if derivative:
        if n == 0:
            deriv = np.zeros_like(value)
        else:
            low = jacobi_table(params.alpha + 1, params.beta + 1, n - 1, x)[n - 1]
            deriv = 0.5 * (n + params.alpha + params.beta + 1) * low
    if np.ndim(value) == 0:
        value = float(value)
        deriv = None if deriv is None else float(deriv)
    return PolyValue(value, deriv)


def chebyshev_T(n: int, x):
    """First-kind Chebyshev polynomial via ``T_n(cos t) = cos(n t)``."""
    if n < 0:
        raise ValueError("T_n needs n >= 0")
    x = np.asarray(x, dtype=float)
    # parity keeps the angle near 0, where arccos is accurate
    sign = np.where(x < 0, (-1.0) ** n, 1.0)
    out = sign * np.cos(n * np.arccos(np.clip(np.abs(x), 0.0, 1.0)))
    out = np.where(x == 1.0, 1.0, out)
    out = np.where(x == -1.0, (-1.0) ** n, out)
    return out[()] if out.ndim == 0 else out


def chebyshev_U(n: int, x):
    """Second-kind Chebyshev polynomial; ``U_{-1} = 0``.

    Uses ``sin((n+1)t)/sin t`` at ``|x|`` with parity inside the interval and the limits
    ``U_n(1) = n+1``, ``U_n(-1) = (-1)^n (n+1)`` at the endpoints.
    """
    if n < -1:
        raise ValueError("U_n needs n >= -1")
    x = np.asarray(x, dtype=float)
    if n == -1:
        out = np.zeros_like(x)
        return out[()] if out.ndim == 0 else out
    interior = np.abs(x) < 1.0
    ax = np.where(interior, np.abs(x), 0.0)
    theta = np.arccos(ax)
    sign = np.where(x < 0, (-1.0) ** n, 1.0)
    # sin(theta) from sqrt((1-x)(1+x)) stays accurate as x -> 1
    out = np.where(interior, sign * np.sin((n + 1) * theta) / np.sqrt((1 - ax) * (1 + ax)), 0.0)
    out = np.where(x >= 1.0, n + 1.0, out)
    out = np.where(x <= -1.0, (-1.0) ** n * (n + 1.0), out)
    return out[()] if out.ndim == 0 else out


def sup_norm_estimate(
    evaluator: Callable[[np.ndarray], np.ndarray], n: int, grid_factor: int = 8
) -> float:
    """Estimate ``max |f|`` on [-1, 1] for a degree-``n`` polynomial ``f``.

    The maximum over a Chebyshev grid of at least ``grid_factor*(n+1)``
    points (plus both endpoints) is refined by a bounded scalar search in
    the bracket around the best grid point. Every returned value is an
    actual function value, so the estimate never exceeds the true norm.
    """
    m = max(grid_factor * (n + 1), 16)
    k = np.arange(m)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * m))[::-1]
    grid = np.concatenate(([-1.0], nodes, [1.0]))
    vals = np.abs(np.asarray(evaluator(grid), dtype=float))
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda s: -abs(float(evaluator(np.array([s]))[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, -float(res.fun))
    return best
