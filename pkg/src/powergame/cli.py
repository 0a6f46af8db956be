"""Command-line front end.

Subcommands map one-to-one onto the experiments: `gamma-star` prints the
optimal SIR, `best-response`/`equilibria`/`dynamics` operate on a concrete
channel file, and `pmf`/`compare` run the seeded Monte Carlo sweeps and
emit CSV data plus a JSON manifest (and optional figures with --plot).

Exit codes: 0 success, 1 no equilibrium / no convergence, 2 parse or
usage error, 3 solver failure, 4 infeasible configuration.
"""

import argparse
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from powergame import __version__
from powergame.analytics import pmf_two_user
from powergame.core import (
    FeasibilityError,
    PowerAllocation,
    SolverError,
    best_response,
    effective_gains,
    sir_matrix,
    solve_gamma_star,
)
from powergame.equilibrium import (
    CONVERGED,
    best_response_dynamics,
    enumerate_equilibria,
)
from powergame.montecarlo import compare_total_utility, run_pmf_experiment
from powergame.runio import (
    ConfigError,
    build_spec,
    default_out_dir,
    fmt,
    load_channels,
    load_csv_matrix,
    make_manifest,
    parse_config,
    write_csv,
    write_manifest,
)

EXIT_OK = 0
EXIT_NO_EQUILIBRIUM = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_INFEASIBLE = 4


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="powergame",
        description="Game-theoretic power control for multi-carrier CDMA",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma-star", help="solve for the utility-optimal SIR")
    p.add_argument("--m-exp", type=int, default=100, help="efficiency exponent")
    p.add_argument("--tol", type=_positive_float, default=1e-10)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("best-response", parents=[common], help="per-user best responses")
    p.add_argument("--channels", required=True, help="K x D channel-gain CSV")
    p.add_argument("--powers", default=None, help="current K x D power CSV (default: zeros)")

    p = sub.add_parser("equilibria", parents=[common], help="enumerate Nash equilibria")
    p.add_argument("--channels", required=True)

    p = sub.add_parser("dynamics", parents=[common], help="run best-response dynamics")
    p.add_argument("--channels", required=True)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--tol", type=_positive_float, default=None)

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--trials", type=int, default=None)
    mc.add_argument("--workers", type=int, default=1)
    mc.add_argument("--plot", action="store_true", help="also render a figure")

    sub.add_parser("pmf", parents=[common, mc], help="equilibrium load pmf over an N sweep")
    sub.add_parser("compare", parents=[common, mc], help="joint vs independent utility over a K sweep")
    return parser


def _out_path(args, default_name):
    if args.out:
        return args.out
    return os.path.join(default_out_dir(), default_name)


def _emit(args, default_name, header, rows, manifest):
    path = _out_path(args, default_name)
    manifest["outputs"] = [path, path + ".manifest.json"]
    write_csv(path, header, rows, manifest)
    write_manifest(path + ".manifest.json", manifest)
    return path


def _load_instance(args):
    values = parse_config(args.config)
    spec = build_spec(values)
    channels = load_channels(args.channels, spec.config.K, spec.config.D)
    return values, spec, channels


def cmd_gamma_star(args):
    gs = solve_gamma_star(args.m_exp, args.tol)
    print(f"gamma_star = {fmt(gs)}  ({10 * math.log10(gs):.2f} dB)")
    return EXIT_OK


def cmd_best_response(args):
    _, spec, channels = _load_instance(args)
    config, model = spec.config, spec.config.efficiency_model()
    if args.powers:
        powers = PowerAllocation(load_csv_matrix(args.powers, config.K, config.D))
    else:
        powers = PowerAllocation.zeros(config.K, config.D)
    header = ["user", "carrier", "power_w", "sir"]
    rows = []
    for k in range(config.K):
        response = best_response(config, model, channels, powers, k)
        l = int(np.argmax(response))
        achieved = effective_gains(config, channels, powers, k)[l] * response[l]
        rows.append([k + 1, l + 1, fmt(response[l]), fmt(achieved)])
    manifest = make_manifest("best-response", spec, args.config)
    path = _emit(args, "best_response.csv", header, rows, manifest) if args.out else None
    if path is None:
        print(",".join(header))
        for row in rows:
            print(",".join(str(v) for v in row))
    return EXIT_OK


def cmd_equilibria(args):
    _, spec, channels = _load_instance(args)
    config, model = spec.config, spec.config.efficiency_model()
    found = enumerate_equilibria(channels, config, model)
    header = ["equilibrium", "user", "carrier", "power_w", "sir"]
    rows = []
    for i, (assignment, powers) in enumerate(found, start=1):
        sirs = sir_matrix(config, channels, powers)
        for k, l in enumerate(assignment.chosen):
            rows.append([i, k + 1, l + 1, fmt(powers.powers[k, l]), fmt(sirs[k, l])])
    manifest = make_manifest("equilibria", spec, args.config, extra={"equilibria": len(found)})
    if args.out:
        _emit(args, "equilibria.csv", header, rows, manifest)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(v) for v in row))
    print(f"{len(found)} equilibria", file=sys.stderr)
    return EXIT_OK if found else EXIT_NO_EQUILIBRIUM


def cmd_dynamics(args):
    _, spec, channels = _load_instance(args)
    config, model = spec.config, spec.config.efficiency_model()
    result = best_response_dynamics(
        channels,
        config,
        model,
        max_rounds=args.max_rounds or spec.max_rounds,
        tol=args.tol or spec.tol,
    )
    print(f"status = {result.status}  rounds_used = {result.rounds_used}")
    if result.status != CONVERGED:
        return EXIT_NO_EQUILIBRIUM
    print("user,carrier,power_w,sir")
    for k, l in enumerate(result.assignment.chosen):
        print(f"{k + 1},{l + 1},{fmt(result.powers.powers[k, l])},{fmt(result.sirs[k, l])}")
    return EXIT_OK


def cmd_pmf(args):
    values = parse_config(args.config)
    spec = build_spec(values, seed=args.seed, trials=args.trials, sweep=values.get("sweep_N"))
    config, model = spec.config, spec.config.efficiency_model()
    gs = model.gamma_star
    started = time.perf_counter()
    estimates = run_pmf_experiment(spec, model, workers=args.workers)
    analytic = {e.N: pmf_two_user(e.N, model) for e in estimates} if config.K == 2 else {}
    header = ["N", "m", "analytic", "mc_freq", "stderr", "count", "crowded_feasible"]
    rows = []
    for est in estimates:
        feasible = int(replace(config, N=est.N).crowded_carrier_feasible(gs))
        closed = analytic.get(est.N)
        for m in range(config.K + 1):
            a = fmt(closed.as_dict()[str(m)]) if closed and m <= 2 else ""
            rows.append([est.N, m, a, fmt(est.freqs[m]), fmt(est.stderrs[m]), est.counts[m], feasible])
        a = fmt(closed.p_none) if closed else ""
        rows.append([est.N, "none", a, fmt(est.none_freq), fmt(est.none_stderr), est.none_count, feasible])
    manifest = make_manifest(
        "pmf", spec, args.config, extra={"workers": args.workers, "wall_clock_s": time.perf_counter() - started}
    )
    path = _emit(args, "pmf.csv", header, rows, manifest)
    if args.plot:
        from powergame.plotting import plot_pmf

        plot_pmf(estimates, analytic or None, os.path.splitext(path)[0] + ".png")
    return EXIT_OK


def cmd_compare(args):
    values = parse_config(args.config)
    spec = build_spec(values, seed=args.seed, trials=args.trials, sweep=values.get("sweep_K"))
    started = time.perf_counter()
    results = compare_total_utility(spec, workers=args.workers)
    header = ["K", "mean_joint", "mean_independent", "ratio", "convergence_rate", "converged_trials", "trials"]
    rows = [
        [
            r.K,
            fmt(r.mean_joint),
            fmt(r.mean_independent),
            fmt(r.ratio),
            fmt(r.convergence_rate),
            r.converged_trials,
            r.trials,
        ]
        for r in results
    ]
    manifest = make_manifest(
        "compare", spec, args.config, extra={"workers": args.workers, "wall_clock_s": time.perf_counter() - started}
    )
    path = _emit(args, "compare.csv", header, rows, manifest)
    if args.plot:
        from powergame.plotting import plot_compare

        plot_compare(results, os.path.splitext(path)[0] + ".png")
    return EXIT_OK


_HANDLERS = {
    "gamma-star": cmd_gamma_star,
    "best-response": cmd_best_response,
    "equilibria": cmd_equilibria,
    "dynamics": cmd_dynamics,
    "pmf": cmd_pmf,
    "compare": cmd_compare,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FeasibilityError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
