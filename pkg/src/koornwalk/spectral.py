"""Karlin-McGregor integrals: t-step probabilities, distributions, TV distance.

For the shifted chain started at ``j``,

    p_t(j, n) = pi_n * int ((x + lam)/(1 + lam))^t Q_j(x) Q_n(x) dpsi(x).

The continuous part of ``psi`` is integrated with a Gauss rule exact for
the polynomial integrand; the atom at 1 contributes ``N/(N+1)``.
Nodes whose weighted integrand falls below ``prune_tol`` times the
largest one are dropped; their combined effect is far below roundoff.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from . import kernels
from .chain import ChainSpec, chebyshev_tail, coefficients, reversibility
from .errors import DegreeTooLarge
from .koornwinder import KoornwinderParams
from .quadrature import (
    CHEBYSHEV_K_MAX,
    GENERAL_K_MAX,
    QuadratureRule,
    build_rule_nodes,
    nodes_for_degree,
)
from .snapshot import DistributionSnapshot

PRUNE_TOL = 1e-30


def build_rule(params: KoornwinderParams, degree: int) -> QuadratureRule:
    """Gauss rule for the continuous part of ``dpsi``, exact to ``degree``."""
    return build_rule_nodes(params.alpha, params.beta, params.big_n, nodes_for_degree(degree))


def k_limit(params: KoornwinderParams) -> int:
    return CHEBYSHEV_K_MAX if params.chebyshev else GENERAL_K_MAX


def _poly_at(nodes, coeffs, n):
    # Q_n at the nodes by the forward recurrence
    prev = np.zeros_like(nodes)
    cur = np.ones_like(nodes)
    for m in range(n):
        prev, cur = cur, ((nodes - coeffs.r[m]) * cur - coeffs.q[m] * prev) / coeffs.p[m]
    return cur


def continuous_moments(
    spec: ChainSpec,
    t: int,
    nmax: int,
    start: int | None = None,
    nodes: int | None = None,
    prune_tol: float = PRUNE_TOL,
    backend: str | None = None,
):
    """``S_n = int_(-1,1) g(x)^t Q_start(x) Q_n(x) dpsi`` for ``n = 0..nmax``.

    ``g(x) = (x + lam)/(1 + lam)``. Returns ``(S, coeffs, rule)``; the
    default node count integrates every ``S_n`` exactly.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    start = spec.origin if start is None else start
    if nodes is None:
        nodes = nodes_for_degree(t + start + nmax)
    if nodes > k_limit(spec.params):
        raise DegreeTooLarge(
            f"{nodes} quadrature nodes needed (limit {k_limit(spec.params)}); "
            "use tv_distance_capped for an estimate"
        )
    coeffs = coefficients(spec.params, max(nmax, start) + 1)
    rule = build_rule(spec.params, 2 * nodes - 1)
    x = rule.nodes
    g = (x + spec.lam) / (1.0 + spec.lam)
    w = rule.weights * np.power(g, t) * _poly_at(x, coeffs, start)
    if prune_tol > 0:
        big = np.abs(w).max(initial=0.0)
        keep = np.abs(w) > prune_tol * big
        x, w = x[keep], w[keep]
    s = kernels.km_moments(
        np.ascontiguousarray(x),
        np.ascontiguousarray(w),
        coeffs.p,
        coeffs.r,
        coeffs.q,
        nmax,
        backend=backend,
    )
    return s, coeffs, rule


def _atom(params: KoornwinderParams) -> float:
    return params.big_n / (params.big_n + 1.0)


def transition_probability(spec: ChainSpec, i: int, k: int, t: int, **kw) -> float:
    """``p_t(i, k)`` for the shifted chain."""
    if t < 0 or i < 0 or k < 0:
        raise ValueError("sites and time must be >= 0")
    if abs(i - k) > t:
        return 0.0
    s, coeffs, _ = continuous_moments(spec, t, k, start=i, **kw)
    pi_k = reversibility(coeffs, up_to=k).values[k]
    raw = pi_k * (s[k] + _atom(spec.params))
    val = min(max(raw, 0.0), 1.0)
    if abs(val - raw) > 1e-9:
        warnings.warn(f"p_{t}({i},{k}) = {raw!r} clipped to [0, 1]", RuntimeWarning)
    return val


def distribution_at(spec: ChainSpec, t: int, size: int | None = None, **kw) -> DistributionSnapshot:
    """``mu_t`` on sites ``0..j+t`` (or ``0..size-1``, zero padded)."""
    j = spec.origin
    top = j + t
    s, coeffs, rule = continuous_moments(spec, t, top, **kw)
    pi = reversibility(coeffs, up_to=top).values
    mu = pi * (s + _atom(spec.params))
    mu = np.maximum(mu, 0.0)
    if size is not None:
        if size < top + 1:
            mu = mu[:size]
        else:
            mu = np.concatenate((mu, np.zeros(size - top - 1)))
    deficit = 1.0 - math.fsum(mu)
    return DistributionSnapshot(t, j, mu, "spectral", deficit, {"nodes": rule.size})


def stationary_tail(spec: ChainSpec, m: int, partial_pi: float | None = None) -> float:
    """``sum_{n>m} nu_n``: telescoped for a = b = -1/2, else ``1 - sum_{n<=m} nu_n``."""
    big_n = spec.params.big_n
    if big_n == 0:
        raise ValueError("no stationary distribution when N = 0")
    if spec.params.chebyshev:
        return chebyshev_tail(big_n, m) * big_n / (big_n + 1)
    if partial_pi is None:
        partial_pi = reversibility(coefficients(spec.params, m + 1), up_to=m).partial_sum
    return max(1.0 - _atom(spec.params) * partial_pi, 0.0)


def _tv_from_moments(spec, s, coeffs, top):
    pi = reversibility(coeffs, up_to=top).values
    body = math.fsum(pi * np.abs(s[: top + 1]))
    return 0.5 * (body + stationary_tail(spec, top, math.fsum(pi)))


def tv_distance(spec: ChainSpec, t: int, **kw) -> float:
    """``||nu - mu_t||_TV`` via ``nu_n - mu_t(n) = -pi_n S_n``.

    Sites beyond ``j + t`` carry no mass at time ``t``; their stationary
    mass is added in closed form.
    """
    if spec.params.big_n <= 0:
        raise ValueError("TV to stationarity needs N > 0")
    top = spec.origin + t
    s, coeffs, _ = continuous_moments(spec, t, top, **kw)
    return _tv_from_moments(spec, s, coeffs, top)


def tv_distance_capped(spec: ChainSpec, t: int, k_cap: int, **kw) -> tuple[float, float]:
    """TV with at most ``k_cap`` nodes; returns ``(value, error_estimate)``.

    When the exact rule fits under the cap the estimate is 0. Otherwise
    the value at ``k_cap`` nodes is compared against ``k_cap // 2``.
    """
    top = spec.origin + t
    need = nodes_for_degree(t + spec.origin + top)
    if need <= k_cap:
        return tv_distance(spec, t, **kw), 0.0
    full = _tv_from_moments(spec, *continuous_moments(spec, t, top, nodes=k_cap, **kw)[:2], top)
    half = _tv_from_moments(
        spec, *continuous_moments(spec, t, top, nodes=max(k_cap // 2, 1), **kw)[:2], top
    )
    return full, abs(full - half)


def tv_curve(spec: ChainSpec, times, **kw) -> np.ndarray:
    return np.array([tv_distance(spec, int(t), **kw) for t in times])
