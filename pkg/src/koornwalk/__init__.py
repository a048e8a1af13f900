"""Birth-death chains built from Koornwinder polynomials with an atom at 1.

The shifted chain ``P_lam`` is analysed through its Karlin-McGregor
spectral representation and checked against truncated matrix powers and
Monte Carlo simulation.
"""
__version__ = "0.1.0"

from .chain import ChainSpec, chain_stationary, coefficients, lambda_min, reversibility, shift
from .errors import (
    DegreeTooLarge,
    InsufficientRange,
    KoornwalkError,
    NegativeEntry,
    NotMixedByCap,
    NotPositiveRecurrent,
    NotStabilized,
    SingularSystem,
    TruncationTooSmall,
    Underflow,
)
from .koornwinder import KoornwinderParams, q_eval, spectral_measure
from .oracle import monte_carlo, truncated_power, tv_between
from .spectral import distribution_at, transition_probability, tv_distance

__all__ = [
    "ChainSpec",
    "DegreeTooLarge",
    "InsufficientRange",
    "KoornwalkError",
    "KoornwinderParams",
    "NegativeEntry",
    "NotMixedByCap",
    "NotPositiveRecurrent",
    "NotStabilized",
    "SingularSystem",
    "TruncationTooSmall",
    "Underflow",
    "chain_stationary",
    "coefficients",
    "distribution_at",
    "lambda_min",
    "monte_carlo",
    "q_eval",
    "reversibility",
    "shift",
    "spectral_measure",
    "transition_probability",
    "truncated_power",
    "tv_between",
    "tv_distance",
]
