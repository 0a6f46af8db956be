"""Nash-equilibrium machinery: verification, enumeration, dynamics.

The interference-loading factor Theta_n = 1 / (1 - (n-1) gamma*/N) turns
the equilibrium conditions into pure channel-gain ratio tests: user k may
sit on carrier l at equilibrium only if, for every other carrier i,

    h[k,l] / h[k,i] > (Theta_{n(l)} / Theta_{n(i)}) * Theta_0

where n(l) counts the users on carrier l including k, and n(i) counts the
incumbents on carrier i without k. The closed-form equilibrium power is
p[k,l] = gamma* sigma^2 Theta_{n(l)} / h[k,l].
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from powergame.core import (
    ChannelMatrix,
    FeasibilityError,
    PowerAllocation,
    best_response,
    sir_matrix,
)

CONVERGED = "converged"
NO_EQUILIBRIUM = "no_equilibrium"

# classify_2x2 labels
BOTH_C1 = "both_c1"
BOTH_C2 = "both_c2"
SPLIT_12 = "split_12"
SPLIT_21 = "split_21"
TWO_EQUILIBRIA = "two_equilibria"


@dataclass(frozen=True)
class CarrierAssignment:
    """Per-user carrier choices plus per-carrier occupancy counts."""

    chosen: tuple  # chosen[k] = carrier index of user k, 0-based
    D: int

    def __post_init__(self):
        if any(c < 0 or c >= self.D for c in self.chosen):
            raise ValueError("carrier index out of range")

    @property
    def K(self):
        return len(self.chosen)

    @property
    def occupancy(self):
        counts = [0] * self.D
        for c in self.chosen:
            counts[c] += 1
        return tuple(counts)

    @classmethod
    def from_powers(cls, powers, D=None):
        """Read off each user's carrier as its largest-power entry."""
        P = powers.powers if isinstance(powers, PowerAllocation) else np.asarray(powers)
        return cls(tuple(int(np.argmax(row)) for row in P), D or P.shape[1])


@dataclass(frozen=True)
class VerifyOutcome:
    """Result of an equilibrium check; truthy iff the assignment verifies."""

    ok: bool
    reason: str  # "ok", "inequality_violated", "infeasible_occupancy"

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class EquilibriumResult:
    status: str  # CONVERGED or NO_EQUILIBRIUM
    powers: PowerAllocation
    rounds_used: int
    assignment: CarrierAssignment | None = None
    sirs: np.ndarray | None = None
    clamped: tuple = ()  # indices of users pinned at p_max


def theta(n, gamma_star, N):
    """Interference-loading factor for n co-channel users; Theta_1 = 1."""
    denom = 1.0 - (n - 1) * gamma_star / N
    if denom <= 0:
        raise FeasibilityError(
            f"processing gain {N} cannot support {n} users at SIR {gamma_star:.4g}"
        )
    return 1.0 / denom


def equilibrium_powers(assignment, channels, config, model):
    """Closed-form powers for a candidate equilibrium assignment.

    Returns (PowerAllocation, clamped) where `clamped` lists the users whose
    closed-form power exceeded p_max and was capped. Raises FeasibilityError
    when some occupied carrier cannot support its load.
    """
    gs = model.gamma_star
    H = channels.gains
    occ = assignment.occupancy
    thetas = {n: theta(n, gs, config.N) for n in set(occ) if n > 0}
    P = np.zeros((config.K, config.D))
    clamped = []
    for k, l in enumerate(assignment.chosen):
        p = gs * config.noise_power * thetas[occ[l]] / H[k, l]
        if p > config.p_max:
            p = config.p_max
            clamped.append(k)
        P[k, l] = p
    return PowerAllocation(P), tuple(clamped)


def verify_assignment(assignment, channels, config, model, ignore_users=()):
    """Check the ratio conditions for `assignment` to be a Nash equilibrium.

    Strict inequalities; boundary ties are classified as not an equilibrium.
    Users in `ignore_users` (e.g. power-clamped ones, for which the target
    SIR is unattainable) are skipped.
    """
    gs = model.gamma_star
    H = channels.gains
    occ = assignment.occupancy
    try:
        theta0 = theta(0, gs, config.N)
        thetas = {n: theta(n, gs, config.N) for n in set(occ)}
    except FeasibilityError:
        return VerifyOutcome(False, "infeasible_occupancy")
    skip = set(ignore_users)
    for k, l in enumerate(assignment.chosen):
        if k in skip:
            continue
        for i in range(config.D):
            if i == l:
                continue
            # occ[i] already excludes user k (k sits on carrier l)
            threshold = thetas[occ[l]] / thetas[occ[i]] * theta0
            if not H[k, l] / H[k, i] > threshold:
                return VerifyOutcome(False, "inequality_violated")
    return VerifyOutcome(True, "ok")


def enumerate_equilibria(channels, config, model, limit=10**6):
    """All of the D^K single-carrier assignments that verify as equilibria.

    Returns a list of (CarrierAssignment, PowerAllocation) pairs; an empty
    list means the game has no Nash equilibrium.
    """
    total = config.D**config.K
    if total > limit:
        raise PowerGameCapacityError(
            f"{config.D}^{config.K} = {total} assignments exceed the limit {limit}"
        )
    found = []
    for chosen in product(range(config.D), repeat=config.K):
        assignment = CarrierAssignment(chosen, config.D)
        if verify_assignment(assignment, channels, config, model):
            powers, _ = equilibrium_powers(assignment, channels, config, model)
            found.append((assignment, powers))
    return found


class PowerGameCapacityError(FeasibilityError):
    """Enumeration guard: the assignment space is too large."""


def _relative_round_change(P, P_prev):
    """Largest per-user power change, relative to that user's power scale.

    Powers live many orders of magnitude apart (sigma^2 ~ 5e-16), so an
    absolute metric is meaningless; a user cycling between carriers keeps
    this measure near 1, a user settling on a fixed point drives it to 0.
    """
    delta = np.abs(P - P_prev).max(axis=1)
    scale = np.maximum(P.max(axis=1), np.finfo(float).tiny)
    return float((delta / scale).max())


def best_response_dynamics(
    channels,
    config,
    model,
    initial_powers=None,
    max_rounds=20,
    tol=1e-9,
    convergence_margin=1e-2,
):
    """Sequential best-response updates until the powers stop moving.

    Users update in index order, each seeing the latest powers of the
    others. A round is one pass over all K users; the dynamics stop early
    once the relative per-round power change falls below `tol`. Instances
    whose co-channel coupling contracts slowly (small N) may not reach
    `tol` within max_rounds even though they are geometrically converging,
    so the final round is classified as converged when its relative change
    is below `convergence_margin`; carrier-cycling and power-escalating
    instances keep the change near 1 and are reported as NO_EQUILIBRIUM,
    the experimental convention for games without an equilibrium.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if initial_powers is None:
        P = np.zeros((config.K, config.D))
    else:
        P = np.array(
            initial_powers.powers
            if isinstance(initial_powers, PowerAllocation)
            else initial_powers,
            dtype=float,
        )
    for rounds_used in range(1, max_rounds + 1):
        P_prev = P.copy()
        for k in range(config.K):
            P[k] = best_response(config, model, channels, P, k)
        change = _relative_round_change(P, P_prev)
        threshold = convergence_margin if rounds_used == max_rounds else tol
        if change < threshold:
            allocation = PowerAllocation(P)
            assignment = CarrierAssignment.from_powers(allocation, config.D)
            clamped = tuple(
                k
                for k, l in enumerate(assignment.chosen)
                if P[k, l] >= config.p_max * (1.0 - 1e-12)
            )
            return EquilibriumResult(
                status=CONVERGED,
                powers=allocation,
                rounds_used=rounds_used,
                assignment=assignment,
                sirs=sir_matrix(config, channels, allocation),
                clamped=clamped,
            )
    return EquilibriumResult(
        status=NO_EQUILIBRIUM, powers=PowerAllocation(P), rounds_used=max_rounds
    )


def classify_2x2(channels, config, model):
    """Equilibrium region of a 2-user, 2-carrier instance.

    The four candidate equilibria reduce to ratio tests against Theta_2
    (shared carrier) and Theta_0 (split carriers); two of the split regions
    can overlap, giving the two-equilibria label. Must agree with
    enumerate_equilibria.
    """
    if config.K != 2 or config.D != 2:
        raise ValueError("classifier requires K = 2 and D = 2")
    gs = model.gamma_star
    H = channels.gains
    theta0 = theta(0, gs, config.N)
    try:
        theta2 = theta(2, gs, config.N)
    except FeasibilityError:
        theta2 = np.inf  # shared-carrier equilibria impossible
    r1 = H[0, 0] / H[0, 1]
    r2 = H[1, 0] / H[1, 1]
    hits = []
    if r1 > theta2 and r2 > theta2:
        hits.append(BOTH_C1)
    if 1 / r1 > theta2 and 1 / r2 > theta2:
        hits.append(BOTH_C2)
    if r1 > theta0 and 1 / r2 > theta0:
        hits.append(SPLIT_12)
    if 1 / r1 > theta0 and r2 > theta0:
        hits.append(SPLIT_21)
    if not hits:
        return NO_EQUILIBRIUM
    if len(hits) == 1:
        return hits[0]
    return TWO_EQUILIBRIA
