"""Command-line interface.

Subcommands: gen, solve-sdp, track, greedy, random, exhaustive, bound,
bench, histogram. Exit codes: 0 success, 2 validation error, 3 solver
failure, 4 enumeration budget refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    METHODS,
    BenchConfig,
    run_benchmark,
    run_histogram,
    trajectory_csv,
    write_histogram_outputs,
)
from .bounds import compute_bound, save_report
from .errors import (
    AssemblyError,
    BudgetError,
    ConditioningError,
    DomainError,
    ParameterError,
    SchemaError,
    SolverFailure,
    ValidationError,
)
from .model import generate_scenario, load_scenario, save_scenario
from .scheduler import (
    EXHAUSTIVE_BUDGET,
    detect_period,
    exhaustive_search,
    greedy_schedule,
    random_search,
    track_covariance,
)
from .sdp_relax import (
    build_relaxation,
    load_solution,
    save_solution,
    solve_relaxation,
)

_VALIDATION_ERRORS = (
    ParameterError,
    ValidationError,
    SchemaError,
    DomainError,
    AssemblyError,
    ConditioningError,
    FileNotFoundError,
    IsADirectoryError,
)


def _add_scenario_arg(p):
    p.add_argument("--scenario", required=True, help="scenario JSON file")


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=1e-7, help="solver tolerance")
    p.add_argument("--solver", choices=("clarabel", "scs"), default="clarabel")


def _add_result_args(p):
    p.add_argument("--out", help="write the result document (JSON) here")
    p.add_argument("--traj", help="write the trajectory CSV (t, tr_P, tr_P_pred) here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="covsched",
        description="Single-active-sensor scheduling for linear-Gaussian "
        "state estimation: convex relaxation, covariance tracking, baselines, "
        "exhaustive oracle, and suboptimality certificates.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random scenario file")
    p.add_argument("--n", type=int, required=True, help="state dimension")
    p.add_argument("--sensors", type=int, default=4, help="number of sensors")
    p.add_argument("--T", type=int, default=100, help="horizon (steps 0..T)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eig-lo", type=float, default=1.0)
    p.add_argument("--eig-hi", type=float, default=1.5)
    p.add_argument("--noise-floor", type=float, default=0.01)
    p.add_argument("--out", required=True, help="output scenario JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve-sdp", help="solve the convex relaxation")
    _add_scenario_arg(p)
    _add_solver_args(p)
    p.add_argument("--out", help="write the solution document (JSON) here")
    p.add_argument("--dump", help="write the assembled program (text) here")
    p.set_defaults(func=cmd_solve_sdp)

    p = sub.add_parser("track", help="round the relaxation by covariance tracking")
    _add_scenario_arg(p)
    _add_solver_args(p)
    p.add_argument("--solution", help="reuse a solve-sdp output instead of solving")
    _add_result_args(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("greedy", help="one-step greedy baseline")
    _add_scenario_arg(p)
    _add_result_args(p)
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("random", help="best-of-k random schedules")
    _add_scenario_arg(p)
    p.add_argument("--k", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    _add_result_args(p)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("exhaustive", help="enumerate all schedules (budgeted)")
    _add_scenario_arg(p)
    p.add_argument("--budget", type=int, default=EXHAUSTIVE_BUDGET)
    p.add_argument(
        "--costs-out",
        help="write the full cost vector (little-endian float64) plus sidecar JSON",
    )
    _add_result_args(p)
    p.set_defaults(func=cmd_exhaustive)

    p = sub.add_parser("bound", help="suboptimality certificate for tracking")
    _add_scenario_arg(p)
    _add_solver_args(p)
    p.add_argument("--budget", type=int, default=EXHAUSTIVE_BUDGET)
    p.add_argument("--out", help="write the report (key-value text) here")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("bench", help="scenario sweep with method comparison")
    p.add_argument("--dims", default=None, help="comma-separated state dimensions")
    p.add_argument("--per-dim", type=int, default=None, help="scenarios per dimension")
    p.add_argument("--sensors", type=int, default=4)
    p.add_argument("--T", type=int, default=None)
    p.add_argument(
        "--methods",
        default="sdp+track,round-theta,greedy,random-k",
        help=f"comma-separated subset of {','.join(METHODS)}",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=2000, help="random-k sample count")
    _add_solver_args(p)
    p.add_argument(
        "--full-scale",
        action="store_true",
        help="full protocol shape: dims 4,6,8,10, 30 scenarios per dim, T=100",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("histogram", help="exhaustive cost histogram at a short horizon")
    _add_scenario_arg(p)
    p.add_argument("--t-small", type=int, default=9, help="reduced horizon")
    p.add_argument("--bin-width", type=float, default=0.5)
    p.add_argument("--budget", type=int, default=EXHAUSTIVE_BUDGET)
    _add_solver_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_histogram)

    return ap


def cmd_gen(args) -> int:
    scen = generate_scenario(
        n=args.n,
        num_sensors=args.sensors,
        T=args.T,
        seed=args.seed,
        eig_range=(args.eig_lo, args.eig_hi),
        noise_floor=args.noise_floor,
    )
    save_scenario(scen, args.out)
    print(f"wrote scenario n={args.n} N={args.sensors} T={args.T} seed={args.seed} to {args.out}")
    return 0


def cmd_solve_sdp(args) -> int:
    scen = load_scenario(args.scenario)
    prog = build_relaxation(scen)
    if args.dump:
        prog.dump(args.dump)
        print(f"wrote program dump to {args.dump}")
    sol = solve_relaxation(prog, tol=args.tol, solver=args.solver)
    st = sol.stats
    print(
        f"status {st.status} objective {sol.objective!r} "
        f"iterations {st.iterations} time {st.solve_time:.3f}s"
    )
    if args.out:
        save_solution(sol, args.out)
        print(f"wrote solution to {args.out}")
    return 0


def _emit_result(args, res) -> None:
    period = detect_period(res.schedule)
    print(f"method {res.method} cost {res.cost!r}")
    print(f"schedule {list(res.schedule.choices)}")
    print(f"period {period if period is not None else 'none'}")
    if args.out:
        doc = {
            "method": res.method,
            "cost": res.cost,
            "schedule": list(res.schedule.choices),
            "period": period,
            "wall_time": res.wall_time,
        }
        if res.residuals is not None:
            doc["residuals"] = [float(v) for v in res.residuals]
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print(f"wrote result to {args.out}")
    if args.traj:
        trajectory_csv(res.trajectory, args.traj)
        print(f"wrote trajectory to {args.traj}")


def cmd_track(args) -> int:
    scen = load_scenario(args.scenario)
    if args.solution:
        sol = load_solution(args.solution)
    else:
        sol = solve_relaxation(build_relaxation(scen), tol=args.tol, solver=args.solver)
        print(f"relaxation objective {sol.objective!r}")
    res = track_covariance(scen, sol.P)
    _emit_result(args, res)
    return 0


def cmd_greedy(args) -> int:
    scen = load_scenario(args.scenario)
    _emit_result(args, greedy_schedule(scen))
    return 0


def cmd_random(args) -> int:
    scen = load_scenario(args.scenario)
    _emit_result(args, random_search(scen, args.k, seed=args.seed))
    return 0


def cmd_exhaustive(args) -> int:
    scen = load_scenario(args.scenario)
    res = exhaustive_search(
        scen, budget=args.budget, return_costs=args.costs_out is not None
    )
    _emit_result(args, res)
    if args.costs_out:
        costs = res.all_costs.astype("<f8")
        with open(args.costs_out, "wb") as fh:
            fh.write(costs.tobytes())
        sidecar = {
            "count": int(costs.shape[0]),
            "dtype": "<f8",
            "order": "mixed-radix little-endian over t (t=0 varies fastest)",
            "N": scen.N,
            "T": scen.T,
            "scenario_seed": scen.seed,
        }
        with open(args.costs_out + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=1)
            fh.write("\n")
        print(f"wrote {costs.shape[0]} costs to {args.costs_out}")
    return 0


def cmd_bound(args) -> int:
    scen = load_scenario(args.scenario)
    sol = solve_relaxation(build_relaxation(scen), tol=args.tol, solver=args.solver)
    star = exhaustive_search(scen, budget=args.budget)
    alg = track_covariance(scen, sol.P)
    report = compute_bound(scen, star.schedule, sol.theta, alg.schedule)
    gap = alg.cost - star.cost
    print(
        f"lambda {report.lam!r} stable {report.stable} epsilon {report.epsilon!r}"
    )
    print(f"tracked cost {alg.cost!r} optimal cost {star.cost!r} gap {gap!r}")
    if args.out:
        save_report(report, args.out)
        print(f"wrote report to {args.out}")
    return 0


def cmd_bench(args) -> int:
    if args.full_scale:
        dims = args.dims or "4,6,8,10"
        per_dim = args.per_dim if args.per_dim is not None else 30
        T = args.T if args.T is not None else 100
    else:
        dims = args.dims or "2,3,4"
        per_dim = args.per_dim if args.per_dim is not None else 10
        T = args.T if args.T is not None else 30
    try:
        dims_t = tuple(int(d) for d in dims.split(","))
    except ValueError:
        raise ParameterError(f"--dims must be comma-separated integers, got {dims!r}")
    config = BenchConfig(
        dims=dims_t,
        scenarios_per_dim=per_dim,
        num_sensors=args.sensors,
        T=T,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        seed=args.seed,
        output_dir=args.out,
        random_k=args.k,
        tol=args.tol,
        solver=args.solver,
    )
    rows = run_benchmark(config)
    errors = sum(1 for r in rows if r["error"])
    print(f"ran {len(rows)} cells ({errors} failed) into {args.out}")
    return 0


def cmd_histogram(args) -> int:
    scen = load_scenario(args.scenario)
    result = run_histogram(
        scen,
        T_small=args.t_small,
        bin_width=args.bin_width,
        tol=args.tol,
        solver=args.solver,
        budget=args.budget,
    )
    write_histogram_outputs(result, args.out)
    print(
        f"binned {result.total} schedules, tracking cost {result.tracking_cost!r} "
        f"(percentile {result.tracking_percentile:.4f}), optimum {result.optimal_cost!r}"
    )
    print(f"wrote histogram outputs to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SolverFailure as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 3
    except BudgetError as e:
        print(f"budget refusal: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
