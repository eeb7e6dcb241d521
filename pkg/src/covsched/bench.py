"""Benchmark harness: scenario sweeps, method comparison, cost histograms.

Everything written here is reproducible: scenario and search seeds derive
from the master seed through SeedSequence, floats are printed with repr (so
they round-trip), and each output directory carries a manifest of content
hashes. Wall-clock measurements live in their own files and are flagged
volatile in the manifest; every other artifact is byte-stable for a fixed
seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CovschedError, ValidationError
from .figures import render_histogram, render_metric_by_dim
from .model import Scenario, generate_scenario, save_scenario, slice_scenario
from .riccati import CovTrajectory, evaluate_schedule
from .scheduler import (
    EXHAUSTIVE_BUDGET,
    exhaustive_search,
    greedy_schedule,
    random_search,
    round_theta,
    track_covariance,
)
from .sdp_relax import build_relaxation, solve_relaxation

METHODS = ("sdp+track", "round-theta", "greedy", "random-k", "exhaustive")


@dataclass(frozen=True)
class BenchConfig:
    """Sweep shape: which dimensions, how many scenarios, which methods."""

    dims: tuple
    scenarios_per_dim: int
    num_sensors: int
    T: int
    methods: tuple
    seed: int
    output_dir: str
    random_k: int = 2000
    bin_width: float = 0.5
    tol: float = 1e-7
    solver: str = "clarabel"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ValidationError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValidationError(f"unknown methods {unknown}, have {list(METHODS)}")
        if not self.dims or min(self.dims) < 1:
            raise ValidationError("dims must be a non-empty list of positive ints")
        if self.scenarios_per_dim < 1 or self.T < 0 or self.num_sensors < 1:
            raise ValidationError("scenarios_per_dim >= 1, T >= 0, num_sensors >= 1")
        if not self.bin_width > 0:
            raise ValidationError("histogram bin width must be positive")
        if self.random_k < 1:
            raise ValidationError("random_k must be >= 1")


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from a tuple of nonnegative integers."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def trajectory_csv(traj: CovTrajectory, path) -> None:
    """Per-step trace export: t, tr(P_t), tr(P_{t|t-1})."""
    rows = [
        (t, _fmt(np.trace(traj.filtered[t])), _fmt(np.trace(traj.predicted[t])))
        for t in range(traj.filtered.shape[0])
    ]
    _write_csv(Path(path), ("t", "tr_P", "tr_P_pred"), rows)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir: Path, files, volatile=()) -> Path:
    """Hash every emitted file into manifest.json (volatile ones flagged)."""
    out_dir = Path(out_dir)
    entries = []
    vol = set(volatile)
    for rel in sorted(str(f) for f in files):
        entries.append(
            {"path": rel, "sha256": _sha256(out_dir / rel), "volatile": rel in vol}
        )
    doc = {"version": 1, "files": entries}
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


class _MethodRunner:
    """Per-scenario method dispatch with one shared relaxation solve."""

    def __init__(self, scenario: Scenario, config: BenchConfig, rk_seed: int):
        self.scenario = scenario
        self.config = config
        self.rk_seed = rk_seed
        self._solution = None

    def solution(self):
        if self._solution is None:
            prog = build_relaxation(self.scenario)
            self._solution = solve_relaxation(
                prog, tol=self.config.tol, solver=self.config.solver
            )
        return self._solution

    def run(self, method: str):
        if method == "sdp+track":
            res = track_covariance(self.scenario, self.solution().P)
            return res.schedule, res.cost
        if method == "round-theta":
            sched = round_theta(self.solution().theta)
            return sched, evaluate_schedule(self.scenario, sched).cost
        if method == "greedy":
            res = greedy_schedule(self.scenario)
            return res.schedule, res.cost
        if method == "random-k":
            res = random_search(self.scenario, self.config.random_k, seed=self.rk_seed)
            return res.schedule, res.cost
        if method == "exhaustive":
            res = exhaustive_search(self.scenario)
            return res.schedule, res.cost
        raise ValidationError(f"unknown method '{method}'")


def run_benchmark(config: BenchConfig):
    """Execute the scenario x method grid and write the report directory.

    Returns the result rows (dicts). Per-row failures are recorded in the
    'error' column and the run continues. Deterministic outputs (results,
    summary, ranks, cost figure) are byte-stable for a fixed seed; timings
    are kept apart and flagged volatile.
    """
    out = Path(config.output_dir)
    (out / "scenarios").mkdir(parents=True, exist_ok=True)
    (out / "schedules").mkdir(exist_ok=True)
    rows = []
    files = []
    for n in config.dims:
        for idx in range(config.scenarios_per_dim):
            scen_seed = derive_seed(config.seed, n, idx)
            scenario = generate_scenario(
                n=n, num_sensors=config.num_sensors, T=config.T, seed=scen_seed
            )
            scen_id = f"n{n}_s{idx}"
            scen_rel = f"scenarios/{scen_id}.json"
            save_scenario(scenario, out / scen_rel)
            files.append(scen_rel)
            runner = _MethodRunner(
                scenario, config, rk_seed=derive_seed(config.seed, n, idx, 1000003)
            )
            for method in config.methods:
                t0 = time.perf_counter()
                try:
                    sched, cost = runner.run(method)
                    err = ""
                except CovschedError as e:
                    sched, cost, err = None, None, f"{type(e).__name__}: {e}"
                seconds = time.perf_counter() - t0
                sched_rel = ""
                if sched is not None:
                    tag = method.replace("+", "_")
                    sched_rel = f"schedules/{scen_id}_{tag}.json"
                    with open(out / sched_rel, "w") as fh:
                        json.dump(list(sched.choices), fh)
                        fh.write("\n")
                    files.append(sched_rel)
                rows.append(
                    {
                        "scenario_id": scen_id,
                        "n": n,
                        "method": method,
                        "cost": cost,
                        "seconds": seconds,
                        "schedule": sched_rel,
                        "error": err,
                    }
                )

    _write_csv(
        out / "results.csv",
        ("scenario_id", "n", "method", "cost", "schedule", "error"),
        [
            (
                r["scenario_id"],
                r["n"],
                r["method"],
                "" if r["cost"] is None else _fmt(r["cost"]),
                r["schedule"],
                r["error"],
            )
            for r in rows
        ],
    )
    files.append("results.csv")
    _write_csv(
        out / "timings.csv",
        ("scenario_id", "n", "method", "seconds"),
        [(r["scenario_id"], r["n"], r["method"], _fmt(r["seconds"])) for r in rows],
    )
    files.append("timings.csv")

    mean_rows = []
    cost_series = {}
    time_series = {}
    for n in config.dims:
        for method in config.methods:
            costs = [
                r["cost"]
                for r in rows
                if r["n"] == n and r["method"] == method and r["cost"] is not None
            ]
            secs = [r["seconds"] for r in rows if r["n"] == n and r["method"] == method]
            if costs:
                mean = float(np.mean(costs))
                mean_rows.append((n, method, _fmt(mean)))
                cost_series.setdefault(method, []).append((n, mean))
            if secs:
                time_series.setdefault(method, []).append((n, float(np.mean(secs))))
    _write_csv(out / "summary.csv", ("n", "method", "mean_cost"), mean_rows)
    files.append("summary.csv")

    ranks, win_fraction = report_rank(rows)
    _write_csv(
        out / "ranks.csv",
        ("scenario_id", "n", "method", "rank"),
        [
            (r["scenario_id"], r["n"], r["method"], ranks.get((r["scenario_id"], r["method"]), ""))
            for r in rows
        ],
    )
    files.append("ranks.csv")
    with open(out / "report.txt", "w") as fh:
        fh.write(f"scenarios {len(config.dims) * config.scenarios_per_dim}\n")
        fh.write(f"methods {','.join(config.methods)}\n")
        if win_fraction is not None:
            fh.write(f"win_fraction_sdp_track {win_fraction!r}\n")
    files.append("report.txt")

    if cost_series:
        render_metric_by_dim(cost_series, "mean total cost", out / "costs.svg",
                             "mean cost by state dimension")
        files.append("costs.svg")
    if time_series:
        render_metric_by_dim(time_series, "mean seconds", out / "times.svg",
                             "mean wall time by state dimension")
        files.append("times.svg")

    write_manifest(out, files, volatile=("timings.csv", "times.svg"))
    return rows


def report_rank(rows):
    """Per-scenario rank of each method by cost; ties share the better rank.

    Returns (ranks, win_fraction): ranks maps (scenario_id, method) to an
    integer (failed rows get none), and win_fraction is the fraction of
    scenarios where sdp+track attains rank 1, or None when it was not run.
    """
    by_scen = {}
    for r in rows:
        by_scen.setdefault(r["scenario_id"], []).append(r)
    ranks = {}
    wins = 0
    total = 0
    has_tracker = any(r["method"] == "sdp+track" for r in rows)
    for scen_id, group in by_scen.items():
        scored = [r for r in group if r["cost"] is not None]
        for r in scored:
            rank = 1 + sum(1 for o in scored if o["cost"] < r["cost"])
            ranks[(scen_id, r["method"])] = rank
        if has_tracker:
            total += 1
            if ranks.get((scen_id, "sdp+track")) == 1:
                wins += 1
    win_fraction = (wins / total) if (has_tracker and total) else None
    return ranks, win_fraction


@dataclass(frozen=True)
class HistogramResult:
    """Binned exhaustive costs plus the tracked schedule's placement."""

    bin_lows: np.ndarray
    counts: np.ndarray
    bin_width: float
    total: int
    tracking_cost: float
    tracking_schedule: tuple
    optimal_cost: float
    tracking_percentile: float  # fraction of schedules strictly cheaper


def run_histogram(
    scenario: Scenario,
    T_small: int,
    bin_width: float = 0.5,
    tol: float = 1e-7,
    solver: str = "clarabel",
    budget: int = EXHAUSTIVE_BUDGET,
) -> HistogramResult:
    """Enumerate all schedules at a reduced horizon and bin their costs.

    The scenario is re-horizoned to T_small, the relaxation is solved and
    tracked to place the marker, and every schedule's cost lands in a
    half-open bin [k * bin_width, (k+1) * bin_width).
    """
    if not bin_width > 0:
        raise ValidationError("histogram bin width must be positive")
    scen = slice_scenario(scenario, start=0, T_new=T_small)
    sol = solve_relaxation(build_relaxation(scen), tol=tol, solver=solver)
    tracked = track_covariance(scen, sol.P)
    sweep = exhaustive_search(scen, budget=budget, return_costs=True)
    costs = sweep.all_costs
    idx = np.floor(costs / bin_width).astype(np.int64)
    lo = int(idx.min())
    counts = np.bincount(idx - lo, minlength=int(idx.max()) - lo + 1)
    bin_lows = (lo + np.arange(counts.shape[0])) * bin_width
    cheaper = int(np.count_nonzero(costs < tracked.cost - 1e-12))
    return HistogramResult(
        bin_lows=bin_lows,
        counts=counts,
        bin_width=float(bin_width),
        total=int(costs.shape[0]),
        tracking_cost=tracked.cost,
        tracking_schedule=tuple(tracked.schedule.choices),
        optimal_cost=sweep.cost,
        tracking_percentile=cheaper / costs.shape[0],
    )


def write_histogram_outputs(result: HistogramResult, out_dir) -> None:
    """hist.csv, summary.csv, hist.svg, and a manifest under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "hist.csv",
        ("bin_low", "count"),
        [(_fmt(b), int(c)) for b, c in zip(result.bin_lows, result.counts)],
    )
    _write_csv(
        out / "summary.csv",
        ("key", "value"),
        [
            ("total_schedules", result.total),
            ("bin_width", _fmt(result.bin_width)),
            ("tracking_cost", _fmt(result.tracking_cost)),
            ("optimal_cost", _fmt(result.optimal_cost)),
            ("tracking_percentile", _fmt(result.tracking_percentile)),
            ("tracking_schedule", " ".join(map(str, result.tracking_schedule))),
        ],
    )
    render_histogram(
        result.bin_lows,
        result.counts,
        result.bin_width,
        result.tracking_cost,
        out / "hist.svg",
    )
    write_manifest(out, ["hist.csv", "summary.csv", "hist.svg"])
