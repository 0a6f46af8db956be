"""Game-theoretic uplink power control for multi-carrier CDMA.

Each user selfishly allocates transmit power across carriers to maximize
its energy efficiency (bits per joule). The library provides the game
primitives (SIR, utility, best response), Nash-equilibrium verification,
enumeration and best-response dynamics, closed-form two-user equilibrium
statistics under Rayleigh fading, and a seeded Monte Carlo engine.
"""

from powergame.core import (
    ChannelMatrix,
    EfficiencyModel,
    FeasibilityError,
    PowerAllocation,
    PowerGameError,
    SolverError,
    SystemConfig,
    best_response,
    effective_gains,
    sir,
    sir_matrix,
    solve_gamma_star,
    throughput,
    utility_independent_sum,
    utility_joint,
)
from powergame.equilibrium import (
    CarrierAssignment,
    EquilibriumResult,
    best_response_dynamics,
    classify_2x2,
    enumerate_equilibria,
    equilibrium_powers,
    theta,
    verify_assignment,
)
from powergame.analytics import TwoUserPmf, asymptotic_pmf, pmf_two_user
from powergame.montecarlo import (
    ExperimentSpec,
    PmfEstimate,
    UtilityComparison,
    compare_total_utility,
    independent_baseline_powers,
    run_pmf_experiment,
    sample_channels,
    trial_rng,
)

__version__ = "0.1.0"
