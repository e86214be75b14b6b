"""Closed-form statistics of an Ising spectrum, computed from ``h`` and ``J`` alone.

All moments are over the uniform distribution on the 2**n energy levels
(the mean is identically zero). Spread estimators predict ``E_max - E_min``
without solving the problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ising import IsingProblem, symmetry_expand
from .special import EULER_GAMMA, erfcinv, normal_upper_quantile

SPREAD_METHODS = ("gumbel", "normal-fit", "erf-heuristic")


@dataclass(frozen=True)
class StatsSummary:
    m2: float
    m3: float
    m4: float
    m5: float
    delta_sq: float

    @property
    def kurtosis(self) -> float:
        return self.m4 / self.m2**2 if self.m2 > 0 else math.nan

    @property
    def skewness(self) -> float:
        return self.m3 / self.m2**1.5 if self.m2 > 0 else math.nan


@dataclass(frozen=True)
class SpreadEstimate:
    value: float
    method: str


def _pair_matrix(p: IsingProblem) -> np.ndarray:
    # Symmetric K with E(s) = sum_{a,b} K[a, b] s_a s_b over all ordered pairs.
    # The fields are first folded into an extra spin; the sign makes the odd
    # moments come out for E itself rather than for -E.
    q = symmetry_expand(p) if p.has_fields() else p
    return -(q.J + q.J.T) / 2.0


def moments(p: IsingProblem) -> tuple[float, float, float, float]:
    """Central moments ``<E^2>, <E^3>, <E^4>, <E^5>`` of the energy levels."""
    K = _pair_matrix(p)
    KK = K * K
    K2 = K @ K
    K3 = K2 @ K
    K4 = K3 @ K
    s_kk = KK.sum()
    s_k2k = (K2 * K).sum()
    m2 = 2.0 * s_kk
    m3 = 8.0 * s_k2k
    m4 = 48.0 * (K3 * K).sum() + 12.0 * s_kk**2 + 32.0 * (KK * KK).sum() - 96.0 * (KK @ KK).sum()
    m5 = (
        384.0 * (K4 * K).sum()
        + 160.0 * s_kk * s_k2k
        - 1920.0 * ((K2 * K) @ KK).sum()
        + 1280.0 * (K2 * K * K * K).sum()
    )
    return float(m2), float(m3), float(m4), float(m5)


def delta_sq(p: IsingProblem) -> float:
    """State average of the summed squared single-flip energy changes.

    Equals ``8 sum_{i>j} J[i, j]**2 + 4 sum_i h_i**2``.
    """
    return float(8.0 * np.sum(p.J**2) + 4.0 * np.sum(p.h**2))


def spin_stats(p: IsingProblem) -> StatsSummary:
    return StatsSummary(*moments(p), delta_sq=delta_sq(p))


def variance(p: IsingProblem) -> float:
    return float(np.sum(p.J**2) + np.sum(p.h**2))


def spread_erf_sk(n: int) -> SpreadEstimate:
    """Fixed SK estimate ``0.887 sqrt(2n(n+3)) erfinv(1 - 1/N)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    value = 0.887 * math.sqrt(2.0 * n * (n + 3)) * erfcinv(2.0**-n)
    return SpreadEstimate(value, "erf-heuristic")


def _sigma(p: IsingProblem) -> float:
    m2 = variance(p)
    if m2 <= 0.0:
        raise ValueError("energy variance is zero; the spread is undefined")
    return math.sqrt(m2)


def spread_normal_fit(p: IsingProblem) -> SpreadEstimate:
    """Twice ``sigma sqrt(2) erfinv(1 - 1/N)`` for energies modelled as Normal(0, m2)."""
    value = 2.0 * _sigma(p) * math.sqrt(2.0) * erfcinv(2.0**-p.n)
    return SpreadEstimate(value, "normal-fit")


def gumbel_parameters(sigma: float, n: int) -> tuple[float, float]:
    """Location and scale of the Gumbel law for the largest of 2**n Normal(0, sigma^2) draws."""
    if n < 2:
        raise ValueError("the Gumbel estimate needs n >= 2")
    N = 2.0**n
    mu = normal_upper_quantile(1.0 / N, sigma)
    beta = normal_upper_quantile(1.0 / (N * math.e), sigma) - mu
    return mu, beta


def spread_gumbel(p: IsingProblem) -> SpreadEstimate:
    mu, beta = gumbel_parameters(_sigma(p), p.n)
    return SpreadEstimate(2.0 * (mu + EULER_GAMMA * beta), "gumbel")


def estimate_spread(p: IsingProblem, method: str = "gumbel") -> SpreadEstimate:
    if method == "gumbel":
        return spread_gumbel(p)
    if method == "normal-fit":
        return spread_normal_fit(p)
    if method == "erf-heuristic":
        return spread_erf_sk(p.n)
    raise ValueError(f"unknown spread method {method!r}; choose from {SPREAD_METHODS}")
