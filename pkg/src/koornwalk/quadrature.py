"""Gauss rules for the continuous part of the Koornwinder measure.

The continuous part is ``(1-x)^a (1+x)^b`` normalized to a probability
density on (-1, 1) and then scaled by ``1/(N+1)``. The atom at 1 is never
part of a rule; callers add it by evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DegreeTooLarge

GENERAL_K_MAX = 100_000
CHEBYSHEV_K_MAX = 100_000_000


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int
    family: str

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def nodes_for_degree(degree: int) -> int:
    """Number of Gauss nodes needed to integrate degree ``degree`` exactly."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    return max(1, -(-(degree + 1) // 2))


def is_chebyshev(alpha: float, beta: float) -> bool:
    return alpha == -0.5 and beta == -0.5


def jacobi_monic_coeffs(alpha: float, beta: float, k: int):
    """Diagonal and off-diagonal of the orthonormal Jacobi matrix of order ``k``."""
    a, b = alpha, beta
    n = np.arange(k, dtype=float)
    s = 2 * n + a + b
    diag = np.empty(k)
    diag[0] = (b - a) / (a + b + 2)
    if k > 1:
        diag[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2))
    off = np.empty(max(k - 1, 0))
    if k > 1:
        off[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
        m = n[2:]
        sm = 2 * m + a + b
        off[1:] = 4 * m * (m + a) * (m + b) * (m + a + b) / (sm**2 * (sm + 1) * (sm - 1))
        off = np.sqrt(off)
    return diag, off


@lru_cache(maxsize=32)
def _gauss_jacobi_unit(alpha: float, beta: float, k: int):
    # Golub-Welsch nodes; weights from the Christoffel function so no
    # eigenvector matrix is ever formed.
    diag, off = jacobi_monic_coeffs(alpha, beta, k)
    if k == 1:
        nodes = diag.copy()
    else:
        nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    nodes = np.sort(nodes)
    prev = np.zeros(k)
    cur = np.ones(k)
    total = np.ones(k)
    for n in range(k - 1):
        nxt = ((nodes - diag[n]) * cur - (off[n - 1] * prev if n > 0 else 0.0)) / off[n]
        prev, cur = cur, nxt
        total += cur * cur
    weights = 1.0 / total
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(alpha: float, beta: float, k: int):
    """Nodes and weights for the normalized Jacobi probability density."""
    if k > GENERAL_K_MAX:
        raise DegreeTooLarge(f"general Gauss-Jacobi rule limited to {GENERAL_K_MAX} nodes, asked {k}")
    return _gauss_jacobi_unit(float(alpha), float(beta), int(k))


def gauss_chebyshev(k: int):
    if k > CHEBYSHEV_K_MAX:
        raise DegreeTooLarge(f"Chebyshev rule limited to {CHEBYSHEV_K_MAX} nodes, asked {k}")
    j = np.arange(k, 0, -1, dtype=float)
    nodes = np.cos((2 * j - 1) * math.pi / (2 * k))
    return nodes, np.full(k, 1.0 / k)


def build_rule_nodes(alpha: float, beta: float, big_n: float, k: int) -> QuadratureRule:
    scale = 1.0 / (big_n + 1.0)
    if is_chebyshev(alpha, beta):
        x, w = gauss_chebyshev(k)
        family = "gauss_chebyshev"
    else:
        x, w = gauss_jacobi(alpha, beta, k)
        family = "gauss_jacobi"
    return QuadratureRule(x, w * scale, 2 * k - 1, family)
