"""Mixing times, the explicit TV upper bound, decay fits and the gap check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .chain import ChainSpec, chebyshev_tail, coefficients, reversibility
from .errors import InsufficientRange, NotMixedByCap
from .koornwinder import q_eval
from .orthopoly import sup_norm_estimate
from .spectral import stationary_tail, tv_distance


@dataclass(frozen=True, eq=False)
class DecayCurve:
    points: tuple
    spec: ChainSpec | None = None
    method: str = "spectral"

    def __post_init__(self):
        pts = tuple((int(t), float(v)) for t, v in self.points)
        object.__setattr__(self, "points", pts)
        ts = [t for t, _ in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("times must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for _, v in pts):
            raise ValueError("TV values must lie in [0, 1]")
        if any(b > a + 1e-10 for (_, a), (_, b) in zip(pts, pts[1:])):
            raise ValueError("TV curve increases beyond roundoff slack")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points])


@dataclass(frozen=True)
class BoundParams:
    c_upper: float
    c_lower: float
    fit_window: tuple[int, int]

    def __post_init__(self):
        if not (self.c_upper > 0 and self.c_lower > 0):
            raise ValueError("bound constants must be positive")


class DecayFit(NamedTuple):
    slope: float
    log_corrected_slope: float
    residuals: np.ndarray
    scaled_min: float  # min of tv * sqrt(t)
    scaled_max: float
    log_scaled_ratio: float  # max/min of tv * sqrt(t) / log t


def log_times(t_min: int, t_max: int, count: int) -> list[int]:
    """``count`` log-spaced integer times in ``[t_min, t_max]`` (duplicates dropped)."""
    ts = np.unique(np.rint(np.geomspace(t_min, t_max, count)).astype(int))
    return [int(t) for t in ts]


def decay_curve(spec: ChainSpec, times, **kw) -> DecayCurve:
    return DecayCurve(tuple((int(t), tv_distance(spec, int(t), **kw)) for t in times), spec)


def mixing_time(
    spec: ChainSpec,
    epsilon: float,
    t_cap: int = 10**7,
    tv: Callable[[int], float] | None = None,
) -> int:
    """Smallest ``t <= t_cap`` with ``TV(t) <= epsilon``.

    Doubling search, bisection, then a check of the two preceding times in
    case the curve is not monotone there.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    cache: dict[int, float] = {}

    def f(t):
        if t not in cache:
            cache[t] = tv(t) if tv is not None else tv_distance(spec, t)
        return cache[t]

    if f(0) <= epsilon:
        return 0
    lo, hi = 0, 1
    while f(hi) > epsilon:
        if hi >= t_cap:
            raise NotMixedByCap(f"TV({t_cap}) = {f(t_cap):.6g} > {epsilon}")
        lo, hi = hi, min(2 * hi, t_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    for c in range(max(hi - 2, 0), hi):
        if f(c) <= epsilon:
            return c
    return hi


def _sup_norms(spec: ChainSpec, nmax: int, mode: str) -> np.ndarray:
    n = np.arange(nmax + 1, dtype=float)
    if mode == "auto":
        mode = "chebyshev" if spec.params.chebyshev else "estimate"
    if mode == "chebyshev":
        if not spec.params.chebyshev:
            raise ValueError("the 4Nn+1 bound only holds for a = b = -1/2")
        return 4 * spec.params.big_n * n + 1
    if mode == "estimate":
        return np.array(
            [sup_norm_estimate(lambda x, k=k: q_eval(spec.params, k, x), k) for k in range(nmax + 1)]
        )
    raise ValueError(f"unknown sup-norm mode {mode!r}")


def tv_bound_terms(spec: ChainSpec, t: int, sup_norms: str = "auto") -> tuple[float, float]:
    """``(main, tail)`` so that the bound is ``constant * main + tail``."""
    if t < 1:
        raise ValueError("bound needs t >= 1")
    j = spec.origin
    top = t + j
    pi = reversibility(coefficients(spec.params, top + 1), up_to=top).values
    norms = _sup_norms(spec, top, sup_norms)
    main = norms[j] / (t + 1) ** (1 + spec.params.alpha) * math.fsum(pi * norms)
    big_n = spec.params.big_n
    if spec.params.chebyshev:
        tail_pi = chebyshev_tail(big_n, top)
    else:
        tail_pi = stationary_tail(spec, top, math.fsum(pi)) * (big_n + 1) / big_n
    return main, 0.5 * tail_pi


def tv_bound(spec: ChainSpec, t: int, constant: float, sup_norms: str = "auto") -> float:
    """Upper bound ``C ||Q_j|| (t+1)^-(1+a) sum_{n<=t+j} pi_n ||Q_n|| + 1/2 sum_{n>t+j} pi_n``.

    The constant is not known in closed form; callers calibrate it (see
    :func:`calibrate_tv_bound`).
    """
    if constant <= 0:
        raise ValueError("constant must be positive")
    main, tail = tv_bound_terms(spec, t, sup_norms)
    return constant * main + tail


def calibrate_tv_bound(spec: ChainSpec, t0: int = 100, sup_norms: str = "auto", tv: float | None = None) -> float:
    """Constant making the bound equal the exact TV at ``t0``."""
    value = tv_distance(spec, t0) if tv is None else tv
    main, tail = tv_bound_terms(spec, t0, sup_norms)
    c = max((value - tail) / main, np.finfo(float).tiny)
    # rounding can leave the anchor a few ulps short
    while c * main + tail < value:
        c = np.nextafter(c, np.inf)
    return float(c)


def laplace_reference(alpha: float, lam: float, t: int) -> float:
    """``int_0^L e^{-s(t+1)} s^a ds`` over ``Gamma(a+1)/(t+1)^(1+a)``, ``L = log((1+lam)/lam)``.

    The bulk is integrated with QUADPACK's algebraic-singularity weight;
    beyond ``s = 60/(t+1)`` the integrand is below ``e^-60`` relative.
    """
    if t < 1 or lam <= 0:
        raise ValueError("need t >= 1 and lam > 0")
    upper = math.log((1 + lam) / lam)
    k = t + 1.0
    cut = min(upper, 60.0 / k)
    f = lambda s: math.exp(-s * k)
    head, _ = quad(f, 0.0, cut, weight="alg", wvar=(alpha, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)
    tail = 0.0
    if upper > cut:
        tail, _ = quad(lambda s: f(s) * s**alpha, cut, upper, epsabs=0.0, epsrel=1e-10, limit=200)
    return (head + tail) * k ** (1 + alpha) / math.gamma(alpha + 1)


def fit_decay(curve: DecayCurve) -> DecayFit:
    """Least-squares decay exponents over the curve's window.

    ``slope`` fits ``log tv`` against ``log t``; ``log_corrected_slope``
    fits ``log(tv sqrt t)`` against ``log log t``.
    """
    t, v = curve.times, curve.values
    if t.size < 8 or t[0] <= 1 or t[-1] / t[0] < 100:
        raise InsufficientRange("need >= 8 points spanning two decades with t > 1")
    if np.any(v <= 0):
        raise InsufficientRange("TV values must be positive to fit in log space")
    lt, lv = np.log(t), np.log(v)
    coef = np.polyfit(lt, lv, 1)
    residuals = lv - np.polyval(coef, lt)
    scaled = v * np.sqrt(t)
    log_coef = np.polyfit(np.log(lt), np.log(scaled), 1)
    with_log = scaled / lt
    return DecayFit(
        float(coef[0]),
        float(log_coef[0]),
        residuals,
        float(scaled.min()),
        float(scaled.max()),
        float(with_log.max() / with_log.min()),
    )


class GapReport(NamedTuple):
    support_lower: float
    support_upper: float
    atom_location: float
    gap: float
    top_node_gaps: dict


def spectral_gap_report(spec: ChainSpec, node_counts=(10, 100, 1000)) -> GapReport:
    """Spectrum of ``P_lam``: continuous part on ``((lam-1)/(lam+1), 1]`` plus the atom at 1.

    ``top_node_gaps`` lists ``1 - g(x_max)`` for the largest Gauss node at
    several rule sizes; it shrinks like ``K^-2``, showing the continuous
    spectrum accumulates at the atom.
    """
    from .spectral import build_rule

    lam = spec.lam
    g = lambda x: (x + lam) / (1 + lam)
    lower, upper = g(-1.0), g(1.0)
    gaps = {}
    for k in node_counts:
        rule = build_rule(spec.params, 2 * k - 1)
        gaps[k] = 1.0 - g(float(rule.nodes.max()))
    return GapReport(lower, upper, 1.0, 1.0 - upper, gaps)
