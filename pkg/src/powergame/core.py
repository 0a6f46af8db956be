"""Domain types and single-user primitives of the power control game.

Conventions: K users, D carriers, processing gain N. Matrices are K x D
with row k holding user k's per-carrier quantities. Carrier indices are
0-based internally; the CLI prints them 1-based.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np


class PowerGameError(Exception):
    """Base class for errors raised by this package."""


class SolverError(PowerGameError):
    """A root finder failed to bracket or converge."""


class FeasibilityError(PowerGameError):
    """The processing gain cannot support the requested co-channel load."""


def solve_gamma_star(m_exp, tol=1e-10, bracket=(1e-6, 100.0)):
    """Solve for the efficiency-optimal SIR of f(g) = (1 - e^-g)^m_exp.

    The stationarity condition f(g) = g f'(g) reduces, after cancelling the
    common sigmoid factor, to the scalar equation e^g = 1 + m_exp * g, which
    is solved by bisection on `bracket`.

    Raises SolverError when the bracket holds no sign change (m_exp = 1 is
    the degenerate case: the reduced equation has no positive root).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = bracket

    def resid(g):
        return math.exp(g) - 1.0 - m_exp * g

    flo, fhi = resid(lo), resid(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise SolverError(
            f"no sign change of e^g - 1 - {m_exp} g on [{lo}, {hi}]"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * resid(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = resid(lo)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class EfficiencyModel:
    """Sigmoidal packet-success model f(g) = (1 - e^-g)^m_exp."""

    m_exp: int = 100

    def __post_init__(self):
        if self.m_exp < 1 or self.m_exp != int(self.m_exp):
            raise ValueError("m_exp must be a positive integer")

    def efficiency(self, gamma):
        """Packet success rate at SIR `gamma` (scalar or array), in [0, 1)."""
        g = np.asarray(gamma, dtype=float)
        if np.any(g < 0):
            raise ValueError("SIR must be nonnegative")
        out = (1.0 - np.exp(-g)) ** self.m_exp
        return float(out) if out.ndim == 0 else out

    def derivative(self, gamma):
        """df/dg = m (1 - e^-g)^(m-1) e^-g."""
        g = np.asarray(gamma, dtype=float)
        if np.any(g < 0):
            raise ValueError("SIR must be nonnegative")
        out = self.m_exp * (1.0 - np.exp(-g)) ** (self.m_exp - 1) * np.exp(-g)
        return float(out) if out.ndim == 0 else out

    @cached_property
    def gamma_star(self):
        """Cached utility-maximizing SIR, root of f(g) = g f'(g)."""
        return solve_gamma_star(self.m_exp)


@dataclass(frozen=True)
class SystemConfig:
    """Population and physical-layer parameters of the uplink."""

    K: int
    D: int
    N: int
    noise_power: float = 5e-16
    p_max: float = 1e6
    L: int = 100
    M_bits: int = 100
    R: float = 1e5
    m_exp: int | None = None  # defaults to M_bits

    def __post_init__(self):
        if self.m_exp is None:
            object.__setattr__(self, "m_exp", self.M_bits)
        for name in ("K", "D", "N", "L", "M_bits", "m_exp"):
            v = getattr(self, name)
            if v < 1 or v != int(v):
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("noise_power", "p_max", "R"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        if self.L > self.M_bits:
            raise ValueError("L cannot exceed M_bits")

    def efficiency_model(self):
        return EfficiencyModel(self.m_exp)

    def crowded_carrier_feasible(self, gamma_star):
        """True when all K users can hit gamma_star on a single carrier."""
        return self.N > (self.K - 1) * gamma_star


def _validated_matrix(a, name, positive):
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} entries must be finite")
    if positive:
        if np.any(m <= 0):
            raise ValueError(f"{name} entries must be strictly positive")
    elif np.any(m < 0):
        raise ValueError(f"{name} entries must be nonnegative")
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class ChannelMatrix:
    """K x D matrix of path gains h[k, l] (> 0, finite)."""

    gains: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "gains", _validated_matrix(self.gains, "gains", positive=True)
        )

    @property
    def shape(self):
        return self.gains.shape


@dataclass(frozen=True)
class PowerAllocation:
    """K x D matrix of transmit powers p[k, l] in Watts (>= 0, finite)."""

    powers: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "powers", _validated_matrix(self.powers, "powers", positive=False)
        )

    @classmethod
    def zeros(cls, K, D):
        return cls(np.zeros((K, D)))

    @property
    def shape(self):
        return self.powers.shape


def _gains(channels):
    return channels.gains if isinstance(channels, ChannelMatrix) else np.asarray(channels, float)


def _powers(powers):
    return powers.powers if isinstance(powers, PowerAllocation) else np.asarray(powers, float)


def sir(config, channels, powers, k, l):
    """Matched-filter output SIR of user k on carrier l.

    gamma = p[k,l] h[k,l] / (sigma^2 + (1/N) sum_{j != k} p[j,l] h[j,l])
    """
    H, P = _gains(channels), _powers(powers)
    received = P[:, l] * H[:, l]
    interference = received.sum() - received[k]
    return received[k] / (config.noise_power + interference / config.N)


def sir_matrix(config, channels, powers):
    """K x D matrix of every user's SIR on every carrier."""
    H, P = _gains(channels), _powers(powers)
    received = P * H
    interference = received.sum(axis=0, keepdims=True) - received
    return received / (config.noise_power + interference / config.N)


def effective_gains(config, channels, powers, k):
    """Per-carrier effective channel gains for user k.

    hhat[l] = h[k,l] / (sigma^2 + (1/N) sum_{j != k} p[j,l] h[j,l]),
    so that user k's SIR on carrier l is hhat[l] * p[k,l].
    """
    H, P = _gains(channels), _powers(powers)
    received = P * H
    interference = received.sum(axis=0) - received[k]
    return H[k] / (config.noise_power + interference / config.N)


def throughput(config, model, gamma):
    """Goodput (L/M) * R * f(gamma) in bits/s."""
    return (config.L / config.M_bits) * config.R * model.efficiency(gamma)


def utility_joint(config, model, channels, powers, k):
    """Energy efficiency of user k in bits/Joule.

    Total throughput over all carriers divided by total transmit power;
    0 by convention when the user transmits nothing.
    """
    P = _powers(powers)
    total_power = P[k].sum()
    if total_power == 0.0:
        return 0.0
    gammas = effective_gains(config, channels, powers, k) * P[k]
    return throughput(config, model, gammas).sum() / total_power


def utility_independent_sum(config, model, channels, powers, k):
    """Sum of per-carrier throughput/power ratios for user k.

    The objective of a user optimizing each carrier independently; carriers
    with zero power contribute zero.
    """
    P = _powers(powers)
    gammas = effective_gains(config, channels, powers, k) * P[k]
    rates = throughput(config, model, gammas)
    active = P[k] > 0
    return float(np.sum(rates[active] / P[k][active]))


def best_response(config, model, channels, powers, k):
    """Utility-maximizing power vector for user k given the others' powers.

    Transmit only on the carrier with the largest effective gain, at the
    power that achieves the optimal SIR there (capped at p_max). Ties in
    the argmax go to the lowest carrier index.
    """
    hhat = effective_gains(config, channels, powers, k)
    best = int(np.argmax(hhat))
    p = np.zeros(config.D)
    p[best] = min(model.gamma_star / hhat[best], config.p_max)
    return p
