"""Closed-form equilibrium statistics for two users on two carriers.

Channel gains are i.i.d. exponential with mean 1 (Rayleigh amplitudes),
so each ratio h[k,0]/h[k,1] has CDF t/(1+t), which turns the region tests
of the equilibrium conditions into the simple expressions below.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from powergame.equilibrium import theta


@dataclass(frozen=True)
class TwoUserPmf:
    """Distribution of the number of users on carrier 1 at equilibrium."""

    p0: float
    p1: float
    p2: float
    p_none: float  # probability that no Nash equilibrium exists

    def as_dict(self):
        return {"0": self.p0, "1": self.p1, "2": self.p2, "none": self.p_none}


def pmf_two_user(N, model):
    """Analytic pmf of the carrier-1 load for K = D = 2 under Rayleigh fading.

    For N > gamma* both users can share a carrier and all four candidate
    equilibria have positive probability; for N <= gamma* a shared carrier
    cannot reach the target SIR, so the shared-carrier outcomes have
    probability zero and only the no-equilibrium mass changes.
    """
    gs = model.gamma_star
    theta0 = theta(0, gs, N)
    if N > gs:
        theta2 = theta(2, gs, N)
        p2 = (1.0 / (1.0 + theta2)) ** 2
        p1 = 2.0 * (1.0 / (1.0 + theta0)) ** 2 - ((1.0 - theta0) / (1.0 + theta0)) ** 2
        p_none = 2.0 * ((theta0 / (1.0 + theta0)) ** 2 - (1.0 / (1.0 + theta2)) ** 2)
        return TwoUserPmf(p0=p2, p1=p1, p2=p2, p_none=p_none)
    p_none = 2.0 * (theta0 / (1.0 + theta0)) ** 2
    return TwoUserPmf(p0=0.0, p1=1.0 - p_none, p2=0.0, p_none=p_none)


def asymptotic_pmf(K):
    """Large-processing-gain limit of the carrier-1 load pmf: Binomial(K, 1/2)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return np.array([comb(K, m) for m in range(K + 1)], dtype=float) / 2.0**K
