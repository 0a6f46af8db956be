"""Seeded Monte Carlo experiments over Rayleigh-fading channel draws.

Each trial draws an i.i.d. Exp(1) gain matrix, runs the sequential
best-response dynamics from all-zero powers, and records either the
number of users on carrier 1 at convergence or a no-equilibrium mark.
Trials use independent PRNG substreams keyed by (seed, trial index), so
serial and parallel executions produce bit-identical aggregates: counts
are integers and float sums are reduced chunk-by-chunk in a fixed order
with fixed chunk boundaries.

The batch engine replays the same update schedule as
`equilibrium.best_response_dynamics` across many trials at once
(vectorized over trials, still strictly sequential over users).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from powergame.core import ChannelMatrix, FeasibilityError, PowerAllocation, SystemConfig
from powergame.equilibrium import theta

CHUNK = 2000  # trials per work unit; fixed so the reduction order never varies


@dataclass(frozen=True)
class ExperimentSpec:
    """A reproducible experiment: base system, trial budget, seed, sweep."""

    config: SystemConfig
    trials: int = 20000
    max_rounds: int = 20
    tol: float = 1e-9
    seed: int = 0
    sweep: tuple = ()  # N values for pmf runs, K values for utility runs

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class PmfEstimate:
    """Empirical carrier-1 load distribution at one sweep point."""

    N: int
    trials: int
    counts: tuple  # counts[m] = trials with m users on carrier 1
    none_count: int  # trials with no convergence within max_rounds

    @property
    def freqs(self):
        return np.asarray(self.counts, dtype=float) / self.trials

    @property
    def none_freq(self):
        return self.none_count / self.trials

    @property
    def stderrs(self):
        f = self.freqs
        return np.sqrt(f * (1.0 - f) / self.trials)

    @property
    def none_stderr(self):
        f = self.none_freq
        return float(np.sqrt(f * (1.0 - f) / self.trials))


@dataclass(frozen=True)
class UtilityComparison:
    """Mean total utility, joint game outcome vs. independent baseline."""

    K: int
    trials: int
    converged_trials: int
    mean_joint: float
    mean_independent: float

    @property
    def ratio(self):
        if self.mean_independent == 0.0:
            return float("inf")
        return self.mean_joint / self.mean_independent

    @property
    def convergence_rate(self):
        return self.converged_trials / self.trials


def trial_rng(seed, trial):
    """Counter-based generator for one trial's substream."""
    ss = np.random.SeedSequence(entropy=(int(seed), int(trial)))
    return np.random.Generator(np.random.Philox(ss))


def sample_channels(rng, K, D):
    """K x D i.i.d. Exp(1) path gains via the inverse CDF."""
    u = rng.random((K, D))
    gains = -np.log1p(-u)
    # u == 0 maps to gain 0; nudge to keep gains strictly positive
    return ChannelMatrix(np.maximum(gains, np.finfo(float).tiny))


def _sample_batch(seed, start, stop, K, D):
    out = np.empty((stop - start, K, D))
    for i, trial in enumerate(range(start, stop)):
        out[i] = sample_channels(trial_rng(seed, trial), K, D).gains
    return out


def _dynamics_batch(H, config, gamma_star, max_rounds, tol, convergence_margin=1e-2):
    """Run best-response dynamics on a (T, K, D) stack of channel draws.

    Same schedule and convergence rules as
    `equilibrium.best_response_dynamics`, vectorized over trials. Returns
    (P, rounds) where rounds[t] is the round at which trial t converged,
    or 0 if it never did. Converged trials are frozen so later rounds
    cannot perturb them.
    """
    T, K, D = H.shape
    P = np.zeros_like(H)
    rounds = np.zeros(T, dtype=np.int64)
    idx = np.arange(T)
    noise, N, p_max = config.noise_power, config.N, config.p_max
    tiny = np.finfo(float).tiny
    for r in range(1, max_rounds + 1):
        if idx.size == 0:
            break
        Hs = H[idx]
        Ps = P[idx]
        P_prev = Ps.copy()
        rows = np.arange(idx.size)
        recv = Ps * Hs
        total = recv.sum(axis=1)  # per-carrier received power, (T', D)
        for k in range(K):
            own = recv[:, k, :]
            hhat = Hs[:, k, :] / (noise + (total - own) / N)
            best = hhat.argmax(axis=1)
            p = np.minimum(gamma_star / hhat[rows, best], p_max)
            new_own = np.zeros_like(own)
            new_own[rows, best] = p * Hs[rows, k, best]
            total += new_own - own
            recv[:, k, :] = new_own
            Ps[:, k, :] = 0.0
            Ps[rows, k, best] = p
        delta = np.abs(Ps - P_prev).max(axis=2)  # (T', K)
        scale = np.maximum(Ps.max(axis=2), tiny)
        change = (delta / scale).max(axis=1)
        threshold = convergence_margin if r == max_rounds else tol
        conv = change < threshold
        P[idx] = Ps
        rounds[idx[conv]] = r
        idx = idx[~conv]
    return P, rounds


def _pmf_chunk(args):
    config, gamma_star, seed, start, stop, max_rounds, tol = args
    H = _sample_batch(seed, start, stop, config.K, config.D)
    P, rounds = _dynamics_batch(H, config, gamma_star, max_rounds, tol)
    counts = np.zeros(config.K + 2, dtype=np.int64)  # last slot: no equilibrium
    conv = rounds > 0
    chosen = P[conv].argmax(axis=2)  # (n_conv, K)
    x1 = (chosen == 0).sum(axis=1)
    np.add.at(counts, x1, 1)
    counts[config.K + 1] = np.count_nonzero(~conv)
    return counts


def _map_chunks(fn, arg_list, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, arg_list))
    return [fn(a) for a in arg_list]


def _chunk_bounds(trials):
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def run_pmf_experiment(spec, model=None, workers=1):
    """Estimate the carrier-1 load pmf at every sweep point.

    The sweep holds processing-gain values (defaults to the base config's N).
    Returns one PmfEstimate per sweep point, in sweep order.
    """
    model = model or spec.config.efficiency_model()
    gs = model.gamma_star
    sweep = tuple(spec.sweep) or (spec.config.N,)
    results = []
    for N in sweep:
        cfg = replace(spec.config, N=int(N))
        args = [
            (cfg, gs, spec.seed, start, stop, spec.max_rounds, spec.tol)
            for start, stop in _chunk_bounds(spec.trials)
        ]
        counts = sum(_map_chunks(_pmf_chunk, args, workers))
        results.append(
            PmfEstimate(
                N=cfg.N,
                trials=spec.trials,
                counts=tuple(int(c) for c in counts[: cfg.K + 1]),
                none_count=int(counts[cfg.K + 1]),
            )
        )
    return results


def independent_baseline_powers(channels, config, model):
    """Powers when every user hits the optimal SIR on every carrier.

    All K users share all D carriers, so each needs
    p[k, l] = gamma* sigma^2 Theta_K / h[k, l]; requires N > (K-1) gamma*.
    """
    gs = model.gamma_star
    if not config.crowded_carrier_feasible(gs):
        raise FeasibilityError(
            f"N = {config.N} cannot support {config.K} users per carrier"
        )
    theta_k = theta(config.K, gs, config.N)
    return PowerAllocation(gs * config.noise_power * theta_k / channels.gains)


def _compare_chunk(args):
    config, gamma_star, f_star, seed, start, stop, max_rounds, tol = args
    H = _sample_batch(seed, start, stop, config.K, config.D)
    P, rounds = _dynamics_batch(H, config, gamma_star, max_rounds, tol)
    conv = rounds > 0
    Hc, Pc = H[conv], P[conv]
    rate_scale = config.L / config.M_bits * config.R

    # joint: recompute achieved SIRs from the converged powers
    recv = Pc * Hc
    inter = recv.sum(axis=1, keepdims=True) - recv
    gammas = recv / (config.noise_power + inter / config.N)
    tput = rate_scale * (1.0 - np.exp(-gammas)) ** config.m_exp
    joint_user = tput.sum(axis=2) / Pc.sum(axis=2)
    joint_sum = float(joint_user.sum(axis=1).sum())

    # independent baseline: every user at gamma* on every carrier
    theta_k = theta(config.K, gamma_star, config.N)
    p_ind = gamma_star * config.noise_power * theta_k / Hc
    indep_user = rate_scale * config.D * f_star / p_ind.sum(axis=2)
    indep_sum = float(indep_user.sum(axis=1).sum())

    return joint_sum, indep_sum, int(np.count_nonzero(conv))


def compare_total_utility(spec, model=None, workers=1):
    """Mean total utility of the game outcome vs. the independent baseline.

    The sweep holds user counts K (defaults to the base config's K); both
    averages run over the trials where the dynamics converged, counted in
    `converged_trials`.
    """
    model = model or spec.config.efficiency_model()
    gs = model.gamma_star
    f_star = model.efficiency(gs)
    sweep = tuple(spec.sweep) or (spec.config.K,)
    results = []
    for K in sweep:
        cfg = replace(spec.config, K=int(K))
        if not cfg.crowded_carrier_feasible(gs):
            raise FeasibilityError(
                f"independent baseline infeasible for K = {K} at N = {cfg.N}"
            )
        args = [
            (cfg, gs, f_star, spec.seed, start, stop, spec.max_rounds, spec.tol)
            for start, stop in _chunk_bounds(spec.trials)
        ]
        parts = _map_chunks(_compare_chunk, args, workers)
        joint_sum = sum(p[0] for p in parts)
        indep_sum = sum(p[1] for p in parts)
        n_conv = sum(p[2] for p in parts)
        results.append(
            UtilityComparison(
                K=cfg.K,
                trials=spec.trials,
                converged_trials=n_conv,
                mean_joint=joint_sum / n_conv if n_conv else 0.0,
                mean_independent=indep_sum / n_conv if n_conv else 0.0,
            )
        )
    return results
