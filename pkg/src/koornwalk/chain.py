"""Birth-death chains built from the normalized Koornwinder polynomials.

The polynomials satisfy ``p_n Q_{n+1} + r_n Q_n + q_n Q_{n-1} = x Q_n``
with ``p_n + r_n + q_n = 1``. The diagonal can be negative, so the chain
actually simulated is ``P_lam = (H + lam I) / (1 + lam)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import NegativeEntry, NotPositiveRecurrent, NotStabilized, SingularSystem, Underflow
from .koornwinder import KoornwinderParams, q_table
from .snapshot import DistributionSnapshot

COND_LIMIT = 1e12
NEG_TOL = 1e-14
# scan length for lambda_min outside the closed-form family
N_SCAN = 400


class SiteCoeffs(NamedTuple):
    site: int
    q: float
    r: float
    p: float
    shifted: bool = False


@dataclass(frozen=True, eq=False)
class RecurrenceCoeffs:
    """Tridiagonal coefficients for sites ``0..M`` as arrays."""

    p: np.ndarray
    r: np.ndarray
    q: np.ndarray
    shifted: bool = False
    lam: float = 0.0
    params: KoornwinderParams | None = None

    @property
    def size(self) -> int:
        return self.p.size

    def site(self, n: int) -> SiteCoeffs:
        return SiteCoeffs(n, float(self.q[n]), float(self.r[n]), float(self.p[n]), self.shifted)


@dataclass(frozen=True)
class ChainSpec:
    params: KoornwinderParams
    lam: float
    origin: int = 0

    def __post_init__(self):
        if self.origin < 0:
            raise ValueError("origin site must be >= 0")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")

    @classmethod
    def of(cls, alpha, beta, big_n, lam="auto", origin=0) -> "ChainSpec":
        params = KoornwinderParams.of(alpha, beta, big_n)
        if lam == "auto":
            lam = lambda_min(params)
        return cls(params, float(lam), int(origin))

    def unshifted(self, m: int) -> RecurrenceCoeffs:
        return coefficients(self.params, m)

    def coeffs(self, m: int) -> RecurrenceCoeffs:
        """Shifted (stochastic) coefficients for sites ``0..m``."""
        return shift(coefficients(self.params, m), self.lam)


# -- coefficients -----------------------------------------------------------


def coeffs_chebyshev(big_n: float, n: int) -> SiteCoeffs:
    if n < 0:
        raise ValueError("site must be >= 0")
    if n == 0:
        return SiteCoeffs(0, 0.0, big_n / (big_n + 1), 1 / (big_n + 1))
    lo = 1 + (2 * n - 1) * big_n
    hi = 1 + (2 * n + 1) * big_n
    return SiteCoeffs(n, 0.5 * hi / lo, -2 * big_n * big_n / (lo * hi), 0.5 * lo / hi)


def chebyshev_table(big_n: float, m: int) -> RecurrenceCoeffs:
    n = np.arange(1, m + 1, dtype=float)
    lo = 1 + (2 * n - 1) * big_n
    hi = 1 + (2 * n + 1) * big_n
    p = np.concatenate(([1 / (big_n + 1)], 0.5 * lo / hi))
    q = np.concatenate(([0.0], 0.5 * hi / lo))
    r = np.concatenate(([big_n / (big_n + 1)], -2 * big_n * big_n / (lo * hi)))
    return RecurrenceCoeffs(p, r, q, params=KoornwinderParams.of(-0.5, -0.5, big_n))


def _solve_site(n, qm1, q0, dq0, qh, dqh):
    # rows: x=1, x=-1, d/dx at 0 (fallback: d/dx at 1/2); unknowns (p, r, q)
    idx = [n + 1, n, n - 1]
    cond = math.inf
    for dq, qval, x0 in ((dq0, q0, 0.0), (dqh, qh, 0.5)):
        a = np.array([[1.0, 1.0, 1.0], qm1[idx], dq[idx]])
        rhs = np.array([1.0, -qm1[n], qval[n] + x0 * dq[n]])
        scale = np.abs(a).max(axis=1, keepdims=True)
        if np.any(scale == 0) or not np.all(np.isfinite(a)):
            continue
        cond = np.linalg.cond(a / scale)
        if cond <= COND_LIMIT:
            p, r, q = np.linalg.solve(a / scale, rhs / scale[:, 0])
            return float(q), float(r), float(p)
    raise SingularSystem(n, cond)


@lru_cache(maxsize=64)
def _general_arrays(params: KoornwinderParams, m: int):
    xs = np.array([1.0, -1.0, 0.0, 0.5])
    qv, dq = q_table(params, m + 1, xs, derivative=True)
    p = np.empty(m + 1)
    r = np.empty(m + 1)
    q = np.empty(m + 1)
    # n = 0: p0 Q_1(x) + r0 = x at x = 1 and x = 0
    p[0] = 1.0 / (1.0 - qv[1, 2])
    r[0] = 1.0 - p[0]
    q[0] = 0.0
    for n in range(1, m + 1):
        q[n], r[n], p[n] = _solve_site(n, qv[:, 1], qv[:, 2], dq[:, 2], qv[:, 3], dq[:, 3])
    for arr in (p, r, q):
        arr.setflags(write=False)
    return p, r, q


def coeffs_general(params: KoornwinderParams, n: int) -> SiteCoeffs:
    """Coefficients at site ``n`` from the polynomials themselves.

    Solves the recurrence evaluated at ``x = 1``, ``x = -1`` and its
    derivative at ``x = 0`` (``x = 1/2`` when that system is singular).
    """
    if n < 0:
        raise ValueError("site must be >= 0")
    p, r, q = _general_arrays(params, n)
    return SiteCoeffs(n, float(q[n]), float(r[n]), float(p[n]))


def general_table(params: KoornwinderParams, m: int) -> RecurrenceCoeffs:
    p, r, q = _general_arrays(params, m)
    return RecurrenceCoeffs(p, r, q, params=params)


def coefficients(params: KoornwinderParams, m: int) -> RecurrenceCoeffs:
    """Unshifted coefficients for sites ``0..m``; closed form when a = b = -1/2."""
    if params.chebyshev:
        return chebyshev_table(params.big_n, m)
    return general_table(params, m)


def lambda_min(params: KoornwinderParams, n_scan: int = N_SCAN) -> float:
    """Smallest shift making every diagonal entry nonnegative."""
    big_n = params.big_n
    if params.chebyshev:
        return 2 * big_n * big_n / ((1 + big_n) * (1 + 3 * big_n))
    r = general_table(params, n_scan).r
    neg = np.maximum(-r, 0.0)
    neg[neg < 64 * np.finfo(float).eps] = 0.0
    if not neg.any():
        return 0.0
    peak = int(np.argmax(neg))
    tail = neg[max(peak, 1) :]
    # the tail must already be decreasing towards 0
    if peak >= n_scan - n_scan // 4 or np.any(np.diff(tail) > 1e-15):
        raise NotStabilized(
            f"-r_n still increasing at n_scan={n_scan} (peak at n={peak}); increase n_scan"
        )
    return float(neg[peak])


def shift(coeffs, lam: float):
    """Apply ``P_lam = (H + lam I)/(1 + lam)`` to site or table coefficients."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    s = 1.0 + lam
    if isinstance(coeffs, SiteCoeffs):
        out = SiteCoeffs(coeffs.site, coeffs.q / s, (coeffs.r + lam) / s, coeffs.p / s, True)
        for which in ("q", "r", "p"):
            v = getattr(out, which)
            if v < -NEG_TOL:
                raise NegativeEntry(coeffs.site, which, v)
        return out._replace(r=max(out.r, 0.0))
    p, r, q = coeffs.p / s, (coeffs.r + lam) / s, coeffs.q / s
    for which, arr in (("q", q), ("r", r), ("p", p)):
        bad = np.flatnonzero(arr < -NEG_TOL)
        if bad.size:
            raise NegativeEntry(int(bad[0]), which, float(arr[bad[0]]))
    r = np.maximum(r, 0.0)
    return RecurrenceCoeffs(p, r, q, shifted=True, lam=lam, params=coeffs.params)


# -- reversibility and stationarity ----------------------------------------


@dataclass(frozen=True, eq=False)
class ReversibilityMeasure:
    values: np.ndarray
    rho: float
    tail: float
    partial_sum: float
    closed_form_rho: float | None = None


def chebyshev_tail(big_n: float, m: int) -> float:
    """Exact ``sum_{n>m} pi_n`` for the Chebyshev family (telescoping)."""
    if big_n == 0:
        return math.inf
    return (1 + big_n) / (big_n * (1 + (2 * m + 1) * big_n))


def _fitted_tail(values: np.ndarray) -> float:
    # pi_n ~ c n^-s fitted on the last decade, integrated from m + 1/2
    m = values.size - 1
    lo = max(m // 10, 1)
    if m - lo < 4:
        return math.inf
    n = np.arange(lo, m + 1, dtype=float)
    s = -np.polyfit(np.log(n), np.log(values[lo:]), 1)[0]
    if s <= 1.0:
        return math.inf
    c = values[m] * m**s
    return float(c * (m + 0.5) ** (1 - s) / (s - 1))


def reversibility(coeffs: RecurrenceCoeffs, up_to: int | None = None) -> ReversibilityMeasure:
    """``pi_n = p_0...p_{n-1}/(q_1...q_n)`` by running ratios; shift invariant."""
    m = coeffs.size - 1 if up_to is None else up_to
    if m > coeffs.size - 1:
        raise ValueError("not enough coefficients for requested truncation")
    p, q = coeffs.p[:m], coeffs.q[1 : m + 1]
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValueError("reversibility needs p_k > 0 and q_k > 0")
    values = np.concatenate(([1.0], np.cumprod(p / q)))
    tiny = np.flatnonzero(values < 1e-300)
    if tiny.size:
        raise Underflow(f"pi_{tiny[0]} underflows")
    partial = math.fsum(values)
    closed = None
    params = coeffs.params
    if params is not None and params.chebyshev:
        tail = chebyshev_tail(params.big_n, m)
        if params.big_n > 0:
            closed = (params.big_n + 1) / params.big_n
    else:
        tail = _fitted_tail(values)
    values.setflags(write=False)
    return ReversibilityMeasure(values, partial + tail, tail, partial, closed)


def stationary(measure: ReversibilityMeasure, tol: float = 1e-6) -> DistributionSnapshot:
    """``nu = pi / rho`` on the stored sites; the tail mass goes to ``mass_deficit``."""
    if not math.isfinite(measure.rho) or measure.tail > tol * measure.rho:
        raise NotPositiveRecurrent(
            f"partial sums of pi do not settle (tail estimate {measure.tail:.3g})"
        )
    nu = measure.values / measure.rho
    return DistributionSnapshot(
        None, None, nu, "stationary", measure.tail / measure.rho, {"rho": measure.rho}
    )


def chain_stationary(spec: ChainSpec, m: int):
    """``(measure, nu)`` for sites ``0..m`` of ``spec``."""
    measure = reversibility(coefficients(spec.params, m))
    return measure, stationary(measure, tol=1.0)


def printed_pi_closed_form(big_n: float, n: int) -> float:
    """The Chebyshev ``pi_n`` formula as printed, kept only for comparison reports."""
    if n == 0:
        return 1.0
    return 2 * (1 + big_n) * big_n / ((1 + (2 * n - 1) * big_n) * (1 + (2 * n + 1) * big_n))


def direct_pi_closed_form(big_n: float, n: int) -> float:
    """``pi_n`` obtained by multiplying out the Chebyshev coefficients."""
    if n == 0:
        return 1.0
    return 2 * (1 + big_n) / ((1 + (2 * n - 1) * big_n) * (1 + (2 * n + 1) * big_n))
