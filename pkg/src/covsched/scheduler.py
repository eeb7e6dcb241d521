"""Integer schedule construction: tracking, rounding, baselines, enumeration.

The main entry point is track_covariance, which follows a reference
covariance trajectory (normally the relaxation's P trajectory): at each step
it evaluates every sensor's filtered covariance and keeps the one closest to
the reference in Frobenius norm. round_theta, greedy_schedule, and
random_search are cheap alternatives; exhaustive_search is the ground-truth
oracle for instances small enough to enumerate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetError, ParameterError
from .model import Scenario, Schedule, as_schedule
from .riccati import (
    CovTrajectory,
    evaluate_schedule,
    g_batch,
    g_update,
    h_batch,
    h_update,
)

EXHAUSTIVE_BUDGET = 2**22
SWEEP_CHUNK = 4096


@dataclass(frozen=True)
class ScheduleResult:
    """A produced schedule with its exact trajectory and bookkeeping."""

    schedule: Schedule
    trajectory: CovTrajectory
    cost: float
    method: str
    wall_time: float
    residuals: Optional[np.ndarray] = None  # tracking distances, tracking only
    all_costs: Optional[np.ndarray] = None  # full sweep vector, exhaustive only


def track_covariance(scenario: Scenario, reference) -> ScheduleResult:
    """Pick, per step, the sensor whose update lands nearest the reference.

    reference is a (T+1, n, n) stack of target covariances. Ties go to the
    lowest sensor index. The per-step distances of the chosen updates are
    recorded as residuals.
    """
    t0 = time.perf_counter()
    ref = np.asarray(reference, dtype=float)
    T, n, N = scenario.T, scenario.n, scenario.N
    if ref.shape != (T + 1, n, n):
        raise ParameterError(
            f"reference must have shape ({T + 1}, {n}, {n}), got {ref.shape}"
        )
    sensors = scenario.sensor_set.sensors
    choices = []
    residuals = np.empty(T + 1)
    filtered = np.empty((T + 1, n, n))
    predicted = np.empty((T + 1, n, n))
    Ppred = scenario.system.Sigma0
    cost = 0.0
    for t in range(T + 1):
        predicted[t] = Ppred
        cands = [g_update(sensors[i], t, Ppred) for i in range(N)]
        dists = [np.linalg.norm(ref[t] - M, "fro") for M in cands]
        pick = int(np.argmin(dists))
        choices.append(pick + 1)
        residuals[t] = dists[pick]
        P = cands[pick]
        filtered[t] = P
        cost += float(np.trace(P))
        if t < T:
            Ppred = h_update(scenario.system, t + 1, P)
    traj = CovTrajectory(filtered=filtered, predicted=predicted, cost=cost)
    return ScheduleResult(
        schedule=Schedule(tuple(choices)),
        trajectory=traj,
        cost=traj.cost,
        method="track",
        wall_time=time.perf_counter() - t0,
        residuals=residuals,
    )


def round_theta(theta) -> Schedule:
    """Largest-weight sensor per step; ties go to the lowest index."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2:
        raise ParameterError(f"theta must be 2-d, got shape {theta.shape}")
    return Schedule(tuple(int(i) + 1 for i in np.argmax(theta, axis=1)))


def greedy_schedule(scenario: Scenario) -> ScheduleResult:
    """Myopic baseline: minimize the one-step filtered trace at each t."""
    t0 = time.perf_counter()
    T, n, N = scenario.T, scenario.n, scenario.N
    sensors = scenario.sensor_set.sensors
    choices = []
    filtered = np.empty((T + 1, n, n))
    predicted = np.empty((T + 1, n, n))
    Ppred = scenario.system.Sigma0
    cost = 0.0
    for t in range(T + 1):
        predicted[t] = Ppred
        cands = [g_update(sensors[i], t, Ppred) for i in range(N)]
        pick = int(np.argmin([np.trace(M) for M in cands]))
        choices.append(pick + 1)
        P = cands[pick]
        filtered[t] = P
        cost += float(np.trace(P))
        if t < T:
            Ppred = h_update(scenario.system, t + 1, P)
    traj = CovTrajectory(filtered=filtered, predicted=predicted, cost=cost)
    return ScheduleResult(
        schedule=Schedule(tuple(choices)),
        trajectory=traj,
        cost=traj.cost,
        method="greedy",
        wall_time=time.perf_counter() - t0,
    )


def _evaluate_many(scenario: Scenario, sigmas: np.ndarray) -> np.ndarray:
    """Costs of a (B, T+1) array of 1-based schedules, vectorized over B."""
    sys0 = scenario.system
    T, n, N = sys0.T, sys0.n, scenario.N
    B = sigmas.shape[0]
    P = np.broadcast_to(sys0.Sigma0, (B, n, n)).copy()
    costs = np.zeros(B)
    for t in range(T + 1):
        for i in range(N):
            mask = sigmas[:, t] == i + 1
            if not mask.any():
                continue
            s = scenario.sensor_set.sensors[i]
            P[mask] = g_batch(s.obs(t), s.V, P[mask])
        costs += np.trace(P, axis1=1, axis2=2)
        if t < T:
            P = h_batch(sys0.dyn(t), sys0.W, P)
    return costs


def random_search(scenario: Scenario, k: int, seed: int) -> ScheduleResult:
    """Best of k uniformly drawn schedules; deterministic in seed.

    Draws are a single (k, T+1) block from one generator, so for a fixed seed
    the first k' draws of a larger k are the draws of k' (best-of-k cost is
    nonincreasing in k under common random numbers).
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    t0 = time.perf_counter()
    T, N = scenario.T, scenario.N
    rng = np.random.default_rng(seed)
    sigmas = rng.integers(1, N + 1, size=(k, T + 1))
    costs = _evaluate_many(scenario, sigmas)
    best = int(np.argmin(costs))
    sched = Schedule(tuple(int(c) for c in sigmas[best]))
    traj = evaluate_schedule(scenario, sched)
    return ScheduleResult(
        schedule=sched,
        trajectory=traj,
        cost=traj.cost,
        method="random",
        wall_time=time.perf_counter() - t0,
    )


def _digits_le(k: int, N: int, length: int) -> tuple:
    """Little-endian base-N digits (0-based) of index k."""
    out = []
    for _ in range(length):
        out.append(k % N)
        k //= N
    return tuple(out)


def _be_keys(ks: np.ndarray, N: int, length: int) -> np.ndarray:
    """Big-endian comparison keys: lexicographically smaller schedule, smaller key."""
    ks = ks.astype(np.int64)
    keys = np.zeros_like(ks)
    for t in range(length):
        d = (ks // (N**t)) % N
        keys += d * (N ** (length - 1 - t))
    return keys


def exhaustive_search(
    scenario: Scenario,
    budget: int = EXHAUSTIVE_BUDGET,
    return_costs: bool = False,
    chunk: int = SWEEP_CHUNK,
) -> ScheduleResult:
    """Enumerate every schedule; exact but exponential.

    Enumeration order is mixed-radix little-endian over t (the t=0 choice
    varies fastest), so schedule sigma sits at index
    sum_t (sigma(t)-1) * N**t of the cost vector. Among cost ties the
    lexicographically smallest schedule wins. Memory stays bounded by
    sweeping vectorized batches of about `chunk` tails over a scalar walk of
    the earlier steps. With return_costs the full vector rides along on the
    result's all_costs.
    """
    t0 = time.perf_counter()
    T, n, N = scenario.T, scenario.n, scenario.N
    total = N ** (T + 1)
    if total > budget:
        raise BudgetError(
            f"enumeration needs {total} evaluations, budget is {budget}",
            required=total,
            budget=budget,
        )
    tail_len = T + 1
    while N**tail_len > chunk and tail_len > 1:
        tail_len -= 1
    j = T + 1 - tail_len  # steps walked scalar before the vectorized tail
    n_pref = N**j
    sys0 = scenario.system
    sensors = scenario.sensor_set.sensors
    all_costs = np.empty(total) if return_costs else None
    best_cost = np.inf
    best_key = None
    best_idx = None
    for p in range(n_pref):
        partial = 0.0
        Ppred = sys0.Sigma0
        for t, d in enumerate(_digits_le(p, N, j)):
            P = g_update(sensors[d], t, Ppred)
            partial += float(np.trace(P))
            Ppred = h_update(sys0, t + 1, P)
        batch = Ppred[None, :, :]
        tail_costs = np.full(1, partial)
        for t in range(j, T + 1):
            pieces = []
            cost_pieces = []
            for i in range(N):
                s = sensors[i]
                G = g_batch(s.obs(t), s.V, batch)
                pieces.append(G)
                cost_pieces.append(tail_costs + np.trace(G, axis1=1, axis2=2))
            batch = np.concatenate(pieces)
            tail_costs = np.concatenate(cost_pieces)
            if t < T:
                batch = h_batch(sys0.dyn(t), sys0.W, batch)
        if return_costs:
            all_costs[p::n_pref] = tail_costs
        cmin = float(tail_costs.min())
        if cmin <= best_cost:
            cands = p + n_pref * np.flatnonzero(tail_costs == cmin)
            keys = _be_keys(cands, N, T + 1)
            kpos = int(np.argmin(keys))
            if cmin < best_cost or keys[kpos] < best_key:
                best_cost = cmin
                best_key = int(keys[kpos])
                best_idx = int(cands[kpos])
    sched = Schedule(tuple(d + 1 for d in _digits_le(best_idx, N, T + 1)))
    traj = evaluate_schedule(scenario, sched)
    return ScheduleResult(
        schedule=sched,
        trajectory=traj,
        cost=traj.cost,
        method="exhaustive",
        wall_time=time.perf_counter() - t0,
        all_costs=all_costs,
    )


def detect_period(schedule, skip: int | None = None) -> int | None:
    """Smallest period of the schedule's tail, ignoring the first `skip` steps.

    Returns the smallest p >= 1 with sigma(t) = sigma(t+p) for every t in
    [skip, T-p], requiring at least one such comparison; None when no p
    qualifies. skip defaults to half the horizon (the transient is typically
    much shorter than that).
    """
    seq = tuple(as_schedule(schedule).choices)
    T = len(seq) - 1
    if skip is None:
        skip = T // 2
    if not 0 <= skip < len(seq):
        raise ParameterError(f"skip must lie in [0, {T}], got {skip}")
    for p in range(1, T - skip + 1):
        if all(seq[t] == seq[t + p] for t in range(skip, T - p + 1)):
            return p
    return None
