from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METHODS = ("spectral", "matrix_power", "monte_carlo", "stationary")


@dataclass(frozen=True, eq=False)
class DistributionSnapshot:
    """A finite-support probability vector ``mu_t(0..M)``.

    ``mass_deficit`` is ``1 - sum(probabilities)``: mass outside the
    stored support (stationary tails) or roundoff (clipped negatives).
    """

    time: int | None
    origin: int | None
    probabilities: np.ndarray
    method: str
    mass_deficit: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    def __len__(self):
        return self.probabilities.size

    def __getitem__(self, n):
        return self.probabilities[n]
