from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from covsched import evaluate_schedule, load_scenario, load_solution
from covsched.cli import main as cli_main
from covsched.errors import SolverFailure


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "covsched", *map(str, args)],
        capture_output=True, text=True,
    )


@pytest.fixture(scope="module")
def scen_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "scen.json"
    proc = run_cli("gen", "--n", 2, "--sensors", 2, "--T", 4,
                   "--seed", 3, "--out", path)
    assert proc.returncode == 0, proc.stderr
    return path


def test_gen_is_byte_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for p in (a, b):
        proc = run_cli("gen", "--n", 3, "--T", 6, "--seed", 12, "--out", p)
        assert proc.returncode == 0, proc.stderr
    assert a.read_bytes() == b.read_bytes()
    assert load_scenario(a).n == 3


def test_solve_sdp_outputs(tmp_path, scen_path):
    sol_path = tmp_path / "sol.json"
    dump_path = tmp_path / "prog.txt"
    proc = run_cli("solve-sdp", "--scenario", scen_path,
                   "--out", sol_path, "--dump", dump_path)
    assert proc.returncode == 0, proc.stderr
    assert "status optimal" in proc.stdout
    assert "objective" in proc.stdout
    sol = load_solution(sol_path)
    assert sol.theta.shape == (5, 2)
    assert dump_path.read_text().startswith("conicprogram 1")


def test_track_reuses_saved_solution(tmp_path, scen_path):
    sol_path = tmp_path / "sol.json"
    assert run_cli("solve-sdp", "--scenario", scen_path,
                   "--out", sol_path).returncode == 0
    direct = run_cli("track", "--scenario", scen_path,
                     "--out", tmp_path / "r1.json")
    reused = run_cli("track", "--scenario", scen_path, "--solution", sol_path,
                     "--out", tmp_path / "r2.json")
    assert direct.returncode == 0 and reused.returncode == 0
    r1 = json.loads((tmp_path / "r1.json").read_text())
    r2 = json.loads((tmp_path / "r2.json").read_text())
    assert r1["schedule"] == r2["schedule"]
    assert r1["cost"] == pytest.approx(r2["cost"], rel=1e-9)
    assert r1["method"] == "track"
    assert "residuals" in r1


def test_result_document_and_trajectory(tmp_path, scen_path):
    out = tmp_path / "res.json"
    traj = tmp_path / "traj.csv"
    proc = run_cli("greedy", "--scenario", scen_path, "--out", out, "--traj", traj)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert doc["method"] == "greedy"
    assert len(doc["schedule"]) == 5
    assert doc["wall_time"] >= 0
    lines = traj.read_text().splitlines()
    assert lines[0] == "t,tr_P,tr_P_pred"
    assert len(lines) == 6
    scen = load_scenario(scen_path)
    exact = evaluate_schedule(scen, doc["schedule"])
    assert float(lines[1].split(",")[1]) == pytest.approx(
        np.trace(exact.filtered[0]))
    assert "period" in doc


def test_random_seeded_runs_match(tmp_path, scen_path):
    docs = []
    for name in ("x.json", "y.json"):
        out = tmp_path / name
        proc = run_cli("random", "--scenario", scen_path, "--k", 64,
                       "--seed", 9, "--out", out)
        assert proc.returncode == 0
        doc = json.loads(out.read_text())
        doc.pop("wall_time")  # the one volatile field
        docs.append(doc)
    assert docs[0] == docs[1]


def test_exhaustive_cost_dump(tmp_path, scen_path):
    costs_path = tmp_path / "costs.bin"
    proc = run_cli("exhaustive", "--scenario", scen_path,
                   "--costs-out", costs_path)
    assert proc.returncode == 0, proc.stderr
    scen = load_scenario(scen_path)
    costs = np.fromfile(costs_path, dtype="<f8")
    assert costs.shape == (2**5,)
    sidecar = json.loads((tmp_path / "costs.bin.json").read_text())
    assert sidecar["count"] == 32
    assert sidecar["dtype"] == "<f8"
    assert sidecar["N"] == 2 and sidecar["T"] == 4
    # index 0 is the all-first-sensor schedule under the documented order
    assert costs[0] == pytest.approx(evaluate_schedule(scen, [1] * 5).cost)
    assert costs[-1] == pytest.approx(evaluate_schedule(scen, [2] * 5).cost)


def test_bound_command(tmp_path, scen_path):
    out = tmp_path / "report.txt"
    proc = run_cli("bound", "--scenario", scen_path, "--out", out)
    assert proc.returncode == 0, proc.stderr
    assert "lambda" in proc.stdout and "gap" in proc.stdout
    text = out.read_text()
    assert text.startswith("lambda ")
    assert "epsilon" in text


def test_histogram_outputs_and_determinism(tmp_path, scen_path):
    dirs = [tmp_path / "h1", tmp_path / "h2"]
    for d in dirs:
        proc = run_cli("histogram", "--scenario", scen_path,
                       "--t-small", 3, "--out", d)
        assert proc.returncode == 0, proc.stderr
    hist = (dirs[0] / "hist.csv").read_text().splitlines()
    assert hist[0] == "bin_low,count"
    counts = sum(int(r.split(",")[1]) for r in hist[1:])
    assert counts == 2**4
    summary = dict(
        r.split(",", 1) for r in
        (dirs[0] / "summary.csv").read_text().splitlines()[1:]
    )
    assert summary["total_schedules"] == "16"
    assert float(summary["tracking_cost"]) >= float(summary["optimal_cost"])
    svg = (dirs[0] / "hist.svg").read_text()
    assert "tracking cost = " in svg
    assert (dirs[0] / "manifest.json").exists()
    for name in ("hist.csv", "summary.csv", "hist.svg", "manifest.json"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


def test_bench_smoke(tmp_path):
    out = tmp_path / "bench"
    proc = run_cli("bench", "--dims", "2", "--per-dim", 1, "--T", 4,
                   "--methods", "greedy,random-k", "--k", 20,
                   "--seed", 1, "--out", out)
    assert proc.returncode == 0, proc.stderr
    assert "ran 2 cells (0 failed)" in proc.stdout
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "scenario_id,n,method,cost,schedule,error"
    assert len(rows) == 3
    for name in ("summary.csv", "ranks.csv", "timings.csv", "report.txt",
                 "costs.svg", "times.svg", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert any(e.get("volatile") for e in manifest["files"])


def test_missing_scenario_exits_2(tmp_path):
    proc = run_cli("greedy", "--scenario", tmp_path / "nope.json")
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_budget_refusal_exits_4(tmp_path, scen_path):
    proc = run_cli("exhaustive", "--scenario", scen_path, "--budget", 4)
    assert proc.returncode == 4
    assert "budget" in proc.stderr


def test_invalid_generator_arguments_exit_2(tmp_path):
    proc = run_cli("gen", "--n", 2, "--eig-lo", 2.0, "--eig-hi", 1.0,
                   "--out", tmp_path / "x.json")
    assert proc.returncode == 2


def test_unknown_bench_method_exits_2(tmp_path):
    proc = run_cli("bench", "--dims", "2", "--per-dim", 1, "--T", 3,
                   "--methods", "simulated-annealing", "--out", tmp_path / "b")
    assert proc.returncode == 2


def test_solver_failure_exits_3(tmp_path, scen_path, monkeypatch):
    import covsched.cli as climod

    def boom(*a, **k):
        raise SolverFailure("backend gave up")

    monkeypatch.setattr(climod, "solve_relaxation", boom)
    rc = cli_main(["solve-sdp", "--scenario", str(scen_path)])
    assert rc == 3
