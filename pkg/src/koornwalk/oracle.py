"""Independent ground truth for ``mu_t``: truncated matrix powers and simulation.

A nearest-neighbour walk started at ``j`` cannot pass site ``j + t`` in
``t`` steps, so iterating ``mu <- mu P`` on sites ``0..M`` with
``M >= j + t`` is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chain import ChainSpec
from .errors import TruncationTooSmall
from .snapshot import DistributionSnapshot

MC_BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Shifted chain restricted to sites ``0..M``; row ``M`` leaks ``p_M``."""

    sub: np.ndarray  # q_1..q_M
    diag: np.ndarray  # r_0..r_M
    sup: np.ndarray  # p_0..p_{M-1}
    leak: float

    @classmethod
    def from_spec(cls, spec: ChainSpec, m: int) -> "TridiagonalOperator":
        c = spec.coeffs(m)
        return cls(c.q[1:].copy(), c.r.copy(), c.p[:-1].copy(), float(c.p[-1]))

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)


def power_sweep(spec: ChainSpec, times, size: int | None = None, backend=None):
    """Snapshots of ``mu_t`` at each of ``times`` from one forward sweep."""
    times = sorted(set(int(t) for t in times))
    if not times:
        return []
    j = spec.origin
    t_max = times[-1]
    m = j + t_max if size is None else size
    if m < j + t_max:
        raise TruncationTooSmall(f"truncation {m} < j + t = {j + t_max}; result would not be exact")
    c = spec.coeffs(m)
    p = np.ascontiguousarray(c.p)
    r = np.ascontiguousarray(c.r)
    q = np.ascontiguousarray(np.concatenate((c.q, [0.0])))
    mu = np.zeros(m + 1)
    mu[j] = 1.0
    lo = hi = j
    out = []
    now = 0
    for t in times:
        lo, hi = kernels.tridiag_evolve(mu, p, r, q, t - now, lo, hi, backend=backend)
        now = t
        probs = mu.copy()
        out.append(DistributionSnapshot(t, j, probs, "matrix_power", 1.0 - math.fsum(probs)))
    return out


def truncated_power(spec: ChainSpec, t: int, size: int | None = None, backend=None) -> DistributionSnapshot:
    """``mu_t = delta_j P^t`` on sites ``0..size`` (default ``j + t``)."""
    if t < 0:
        raise ValueError("time must be >= 0")
    return power_sweep(spec, [t], size, backend)[0]


def monte_carlo(spec: ChainSpec, t: int, walkers: int, seed: int) -> DistributionSnapshot:
    """Empirical ``mu_t`` from ``walkers`` independent trajectories.

    Walkers are simulated in fixed blocks; block ``b`` draws from a Philox
    stream keyed by ``(b, seed)``, so the output depends only on the seed.
    Each step inverts the uniform against (down, stay, up) in that order.
    """
    if walkers < 1:
        raise ValueError("need at least one walker")
    j = spec.origin
    top = j + t
    c = spec.coeffs(top + 1)
    q_lim = c.q
    r_lim = c.q + c.r
    counts = np.zeros(top + 1, dtype=np.int64)
    seed = int(seed) & ((1 << 64) - 1)
    for b, start in enumerate(range(0, walkers, MC_BLOCK)):
        n = min(MC_BLOCK, walkers - start)
        gen = np.random.Generator(np.random.Philox(key=(b << 64) | seed))
        pos = np.full(n, j, dtype=np.int64)
        for _ in range(t):
            u = gen.random(n)
            pos += np.where(u < q_lim[pos], -1, np.where(u < r_lim[pos], 0, 1))
        counts += np.bincount(pos, minlength=top + 1)
    probs = counts / walkers
    return DistributionSnapshot(t, j, probs, "monte_carlo", 1.0 - math.fsum(probs), {"walkers": walkers, "seed": seed})


def tv_between(a: DistributionSnapshot, b: DistributionSnapshot) -> float:
    """Total variation between two snapshots.

    Shorter vectors are zero padded. When ``b`` is a stationary snapshot
    its mass beyond the stored sites (``b.mass_deficit``) is counted in
    full, which requires ``a`` to vanish there.
    """
    pa, pb = np.asarray(a.probabilities), np.asarray(b.probabilities)
    if b.method == "stationary" and pa.size > pb.size and np.any(pa[pb.size :] != 0):
        raise ValueError("stationary truncation shorter than the support of the other distribution")
    n = max(pa.size, pb.size)
    pa = np.pad(pa, (0, n - pa.size))
    pb = np.pad(pb, (0, n - pb.size))
    total = math.fsum(np.abs(pa - pb))
    if b.method == "stationary":
        total += max(b.mass_deficit, 0.0)
    return 0.5 * total
