"""Jacobi polynomials with a point mass attached at x = 1.

``Q_n`` is the orthogonal family for the probability measure
``dpsi = (w_ab(x) dx + N delta_1) / (N + 1)`` normalized so ``Q_n(1) = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .orthopoly import (
    JacobiParams,
    chebyshev_T,
    chebyshev_U,
    jacobi_derivative_tables,
    log_pochhammer,
)
from .quadrature import build_rule_nodes, nodes_for_degree, is_chebyshev


@dataclass(frozen=True)
class KoornwinderParams:
    jacobi: JacobiParams
    big_n: float

    def __post_init__(self):
        if not self.big_n >= 0:
            raise ValueError(f"point-mass weight N must be >= 0, got {self.big_n}")

    @classmethod
    def of(cls, alpha: float, beta: float, big_n: float) -> "KoornwinderParams":
        return cls(JacobiParams(float(alpha), float(beta)), float(big_n))

    @property
    def alpha(self) -> float:
        return self.jacobi.alpha

    @property
    def beta(self) -> float:
        return self.jacobi.beta

    @property
    def chebyshev(self) -> bool:
        return is_chebyshev(self.alpha, self.beta)


def koornwinder_raw(params: KoornwinderParams, n: int, x):
    """Unnormalized transform ``P_n^{a,b,N}(x)`` with ``P_n^{a,b,N}(1) = (a+1)_n/n!``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if n == 0:
        out = np.ones_like(x)
        return out[()] if out.ndim == 0 else out
    a, b, big_n = params.alpha, params.beta, params.big_n
    l_ab, _ = log_pochhammer(a + b + 2, n - 1)
    l_a, _ = log_pochhammer(a + 1, n)
    l_b, _ = log_pochhammer(b + 1, n)
    l_fact = math.lgamma(n + 1)
    prefactor_a = math.exp(l_ab - l_fact + l_a - l_b)
    b_n = math.exp(l_b + l_fact - l_a - l_ab) + n * (n + a + b + 1) * big_n / (a + 1)
    p, dp = jacobi_derivative_tables(a, b, n, x, order=1)
    out = prefactor_a * (-big_n * (1 + x) * dp[n] + b_n * p[n])
    return out[()] if out.ndim == 0 else out


def _scales(a: float, b: float, n: np.ndarray):
    # Q_n = s_n P_n + N c_n (m_n P_n - (1+x) P_n'); c_0 is undefined and unused
    s = np.exp(gammaln(n + 1) + gammaln(a + 1) - gammaln(a + 1 + n))
    c = np.zeros_like(n)
    k = n[1:]
    c[1:] = np.exp(gammaln(a + b + 1 + k) - gammaln(a + b + 2) + gammaln(b + 1) - gammaln(b + 1 + k))
    m = n * (n + a + b + 1) / (a + 1)
    return s, c, m


def q_table(params: KoornwinderParams, nmax: int, x, derivative: bool = False):
    """``Q_0 .. Q_nmax`` at ``x`` (and ``Q'`` when ``derivative``).

    Shapes are ``(nmax+1,) + shape(x)``. Values at ``x == 1`` are set to 1
    exactly.
    """
    x = np.asarray(x, dtype=float)
    a, b, big_n = params.alpha, params.beta, params.big_n
    order = 2 if derivative else 1
    tabs = jacobi_derivative_tables(a, b, nmax, x, order=order)
    p, dp = tabs[0], tabs[1]
    n = np.arange(nmax + 1, dtype=float)
    s, c, m = _scales(a, b, n)
    shape = (-1,) + (1,) * x.ndim
    s, c, m = s.reshape(shape), c.reshape(shape), m.reshape(shape)
    q = s * p + big_n * c * (m * p - (1 + x) * dp)
    q[0] = 1.0
    q = np.where(x == 1.0, 1.0, q)
    if not derivative:
        return q
    ddp = tabs[2]
    dq = s * dp + big_n * c * ((m - 1) * dp - (1 + x) * ddp)
    dq[0] = 0.0
    return q, dq


def q_eval(params: KoornwinderParams, n: int, x):
    """Normalized ``Q_n(x)`` with ``Q_n(1) = 1``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    out = q_table(params, n, x)[n]
    return out[()] if np.ndim(out) == 0 else out


def q_chebyshev(big_n: float, n: int, x):
    """Closed form ``-N (x+1) U_{n-1}(x) + (1 + 2nN) T_n(x)`` for a = b = -1/2."""
    x = np.asarray(x, dtype=float)
    out = -big_n * (x + 1) * chebyshev_U(n - 1, x) + (1 + 2 * n * big_n) * chebyshev_T(n, x)
    out = np.where(x == 1.0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def jacobi_density_constant(alpha: float, beta: float) -> float:
    """Normalizer making ``(1-x)^a (1+x)^b`` a probability density on (-1, 1)."""
    return math.exp(
        math.lgamma(alpha + beta + 2)
        - math.lgamma(alpha + 1)
        - math.lgamma(beta + 1)
        - (alpha + beta + 1) * math.log(2.0)
    )


@dataclass(frozen=True)
class SpectralMeasure:
    """Continuous Jacobi density on (-1, 1) plus an atom at 1."""

    params: KoornwinderParams

    @property
    def atom_location(self) -> float:
        return 1.0

    @property
    def atom_mass(self) -> float:
        big_n = self.params.big_n
        return big_n / (big_n + 1.0)

    @property
    def continuous_mass(self) -> float:
        return 1.0 / (self.params.big_n + 1.0)

    def density(self, x):
        a, b = self.params.alpha, self.params.beta
        x = np.asarray(x, dtype=float)
        c = jacobi_density_constant(a, b) * self.continuous_mass
        return c * (1 - x) ** a * (1 + x) ** b

    def rule(self, degree: int):
        return build_rule_nodes(
            self.params.alpha, self.params.beta, self.params.big_n, nodes_for_degree(degree)
        )

    def integrate(self, f, degree: int) -> float:
        """``int f dpsi`` for polynomial ``f`` of degree <= ``degree``: rule plus atom."""
        rule = self.rule(degree)
        cont = rule.integrate(f(rule.nodes))
        return cont + self.atom_mass * float(f(np.array([1.0]))[0])


def spectral_measure(params: KoornwinderParams) -> SpectralMeasure:
    return SpectralMeasure(params)
