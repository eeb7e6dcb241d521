"""Convex relaxation of the scheduling problem and its tightening.

The discrete sensor choice at each step is relaxed to a convex combination of
the sensors' information increments. Minimizing sum_t tr(P_t) subject to the
relaxed filter recursion becomes a semidefinite program once the two inverse
relations are loosened to Schur-complement blocks:

    variables per t: P_t, Q_t, Q_{t|t-1} (t >= 1), theta_t in the simplex
    objective:       sum_t tr(P_t)
    coupling:        Q_t = Q_{t|t-1} + sum_i theta^i_t R^i_t
                     (Q_{0|-1} = Sigma0^{-1} is substituted as a constant)
    block 1 (all t):    [[P_t, I], [I, Q_t]] PSD
    block 2 (t >= 1):   [[W^{-1} - Q_{t|t-1},          W^{-1} A_{t-1}],
                         [A_{t-1}' W^{-1},  Q_{t-1} + A_{t-1}' W^{-1} A_{t-1}]] PSD

The blocks encode P_t >= Q_t^{-1} and Q_{t|t-1} <= (A_{t-1} Q_{t-1}^{-1}
A_{t-1}' + W)^{-1}; both are tight at any optimum, and `tighten` removes the
residual slack constructively without increasing the objective.

Matrix variables are packed by svec: upper triangle, row-major, off-diagonal
entries scaled by sqrt(2), so Euclidean inner products of packed vectors equal
trace inner products of the matrices.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    AssemblyError,
    ConditioningError,
    ParameterError,
    SchemaError,
    SolverFailure,
    ValidationError,
)
from .model import Scenario, info_increments
from .riccati import CovTrajectory, _sym, h_update

SQRT2 = math.sqrt(2.0)

_triu_cache: dict = {}


def _triu(n: int):
    hit = _triu_cache.get(n)
    if hit is None:
        iu = np.triu_indices(n)
        scale = np.where(iu[0] == iu[1], 1.0, SQRT2)
        hit = (iu, scale)
        _triu_cache[n] = hit
    return hit


def svec(M: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix into its scaled upper triangle."""
    iu, scale = _triu(M.shape[0])
    return M[iu] * scale


def unsvec(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of svec."""
    iu, scale = _triu(n)
    M = np.zeros((n, n))
    M[iu] = np.asarray(v) / scale
    return M + M.T - np.diag(np.diag(M))


@dataclass(frozen=True)
class VarBlock:
    """Metadata mapping one matrix or weight variable to its index range."""

    name: str  # "P", "Q", "Q_pred", or "theta"
    t: int
    start: int
    size: int


@dataclass(frozen=True)
class ConicProgram:
    """Standard-form conic program.

    minimize c'x subject to A_eq x = b_eq and s = b_cone - A_cone x in K,
    where K stacks num_nonneg nonnegative rows followed by PSD cones of the
    given orders (svec packing). var_blocks maps every variable index to
    exactly one named block.
    """

    c: np.ndarray
    A_eq: sp.csc_matrix
    b_eq: np.ndarray
    A_cone: sp.csc_matrix
    b_cone: np.ndarray
    num_nonneg: int
    psd_orders: tuple
    var_blocks: tuple
    dims: tuple  # (n, N, T)

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    def var_slice(self, name: str, t: int) -> slice:
        for b in self.var_blocks:
            if b.name == name and b.t == t:
                return slice(b.start, b.start + b.size)
        raise KeyError(f"no variable block ({name}, {t})")

    def check_metadata(self) -> None:
        """Every variable index covered by exactly one block."""
        blocks = sorted(self.var_blocks, key=lambda b: b.start)
        pos = 0
        for b in blocks:
            if b.start != pos:
                raise ValidationError(
                    f"variable block ({b.name}, {b.t}) starts at {b.start}, expected {pos}"
                )
            pos += b.size
        if pos != self.num_vars:
            raise ValidationError(f"blocks cover {pos} of {self.num_vars} variables")

    def dump(self, path) -> None:
        """Write a plain-text sparse dump for offline solver debugging.

        Layout: header (dims, variable blocks, cone sizes), then triplet
        sections for the objective, equality matrix/rhs, and cone matrix/rhs.
        Indices are 0-based; only nonzeros are listed.
        """
        n, N, T = self.dims
        with open(path, "w") as fh:
            w = fh.write
            w("conicprogram 1\n")
            w(f"dims {n} {N} {T}\n")
            w(f"nvar {self.num_vars}\n")
            for b in self.var_blocks:
                w(f"var {b.name} {b.t} {b.start} {b.size}\n")
            w(f"cones nonneg {self.num_nonneg} psd {' '.join(map(str, self.psd_orders))}\n")
            nz = np.flatnonzero(self.c)
            w(f"objective {nz.size}\n")
            for i in nz:
                w(f"{i} {self.c[i]!r}\n")
            for tag, A, b in (
                ("eq", self.A_eq, self.b_eq),
                ("cone", self.A_cone, self.b_cone),
            ):
                coo = A.tocoo()
                w(f"{tag}_mat {A.shape[0]} {coo.nnz}\n")
                for r, cix, v in zip(coo.row, coo.col, coo.data):
                    w(f"{r} {cix} {v!r}\n")
                nzb = np.flatnonzero(b)
                w(f"{tag}_rhs {b.shape[0]} {nzb.size}\n")
                for r in nzb:
                    w(f"{r} {b[r]!r}\n")


def build_relaxation(scenario: Scenario) -> ConicProgram:
    """Assemble the relaxation for a scenario.

    Q_{0|-1} enters as the constant Sigma0^{-1} rather than a variable, so the
    program has (T+1)(3L + N) - L scalar variables with L = n(n+1)/2.
    """
    sys0 = scenario.system
    n, T, N = sys0.n, sys0.T, scenario.N
    L = n * (n + 1) // 2
    try:
        Winv = cho_solve(cho_factor(sys0.W, lower=True), np.eye(n))
        S0inv = cho_solve(cho_factor(sys0.Sigma0, lower=True), np.eye(n))
    except np.linalg.LinAlgError as e:
        raise AssemblyError(f"W and Sigma0 must be invertible: {e}") from None
    Winv = _sym(Winv)
    S0inv = _sym(S0inv)

    blocks = []
    nv = 0
    start = {}
    for t in range(T + 1):
        for name, size in (("P", L), ("Q", L), ("Q_pred", L if t >= 1 else 0), ("theta", N)):
            if size == 0:
                continue
            blocks.append(VarBlock(name, t, nv, size))
            start[(name, t)] = nv
            nv += size

    iu, _scale = _triu(n)
    diag_pos = np.flatnonzero(iu[0] == iu[1])
    c = np.zeros(nv)
    for t in range(T + 1):
        c[start[("P", t)] + diag_pos] = 1.0

    # equalities: per t, L coupling rows then one simplex row
    rows, cols, vals, b_eq = [], [], [], []
    r = 0
    ks = np.arange(L)
    for t in range(T + 1):
        svecR = [svec(R) for R in info_increments(scenario.sensor_set, t)]
        rows.extend(r + ks)
        cols.extend(start[("Q", t)] + ks)
        vals.extend(np.ones(L))
        if t >= 1:
            rows.extend(r + ks)
            cols.extend(start[("Q_pred", t)] + ks)
            vals.extend(-np.ones(L))
            b_eq.extend(np.zeros(L))
        else:
            b_eq.extend(svec(S0inv))
        for i in range(N):
            nz = np.flatnonzero(svecR[i])
            rows.extend(r + nz)
            cols.extend([start[("theta", t)] + i] * nz.size)
            vals.extend(-svecR[i][nz])
        r += L
        for i in range(N):
            rows.append(r)
            cols.append(start[("theta", t)] + i)
            vals.append(1.0)
        b_eq.append(1.0)
        r += 1
    A_eq = sp.csc_matrix((vals, (rows, cols)), shape=(r, nv))
    b_eq = np.asarray(b_eq)

    # cone rows: theta >= 0 first, then the PSD blocks
    crows, ccols, cvals, b_cone = [], [], [], []
    rc = 0
    for t in range(T + 1):
        for i in range(N):
            crows.append(rc)
            ccols.append(start[("theta", t)] + i)
            cvals.append(-1.0)
            b_cone.append(0.0)
            rc += 1
    num_nonneg = rc

    big = 2 * n
    iu_big, _ = _triu(big)
    Lbig = iu_big[0].size
    big_idx = {(i, j): k for k, (i, j) in enumerate(zip(*iu_big))}
    small_pairs = list(zip(*iu))
    psd_orders = []

    # [[P_t, I], [I, Q_t]] >= 0
    for t in range(T + 1):
        cb = np.zeros(Lbig)
        for i in range(n):
            cb[big_idx[(i, n + i)]] = SQRT2
        for k, (i, j) in enumerate(small_pairs):
            crows.append(rc + big_idx[(i, j)])
            ccols.append(start[("P", t)] + k)
            cvals.append(-1.0)
            crows.append(rc + big_idx[(n + i, n + j)])
            ccols.append(start[("Q", t)] + k)
            cvals.append(-1.0)
        b_cone.extend(cb)
        rc += Lbig
        psd_orders.append(big)

    # [[Winv - Q_pred_t, Winv A], [A' Winv, Q_{t-1} + A' Winv A]] >= 0
    const_block = None
    for t in range(1, T + 1):
        A_t = sys0.dyn(t - 1)
        if const_block is None or sys0.A.ndim == 3:
            WiA = Winv @ A_t
            const_block = svec(np.block([[Winv, WiA], [WiA.T, _sym(A_t.T @ WiA)]]))
        for k, (i, j) in enumerate(small_pairs):
            crows.append(rc + big_idx[(i, j)])
            ccols.append(start[("Q_pred", t)] + k)
            cvals.append(1.0)
            crows.append(rc + big_idx[(n + i, n + j)])
            ccols.append(start[("Q", t - 1)] + k)
            cvals.append(-1.0)
        b_cone.extend(const_block)
        rc += Lbig
        psd_orders.append(big)

    A_cone = sp.csc_matrix((cvals, (crows, ccols)), shape=(rc, nv))
    prog = ConicProgram(
        c=c,
        A_eq=A_eq,
        b_eq=b_eq,
        A_cone=A_cone,
        b_cone=np.asarray(b_cone),
        num_nonneg=num_nonneg,
        psd_orders=tuple(psd_orders),
        var_blocks=tuple(blocks),
        dims=(n, N, T),
    )
    prog.check_metadata()
    return prog


@dataclass(frozen=True)
class SolverStats:
    status: str  # optimal | near-optimal | infeasible | failure
    raw_status: str
    iterations: Optional[int]
    solve_time: Optional[float]
    primal_res: Optional[float]
    dual_res: Optional[float]
    objective: Optional[float]


@dataclass(frozen=True)
class RelaxedSolution:
    """Weights and matrix trajectories extracted from a solved relaxation."""

    theta: np.ndarray    # (T+1, N)
    P: np.ndarray        # (T+1, n, n)
    Q: np.ndarray        # (T+1, n, n)
    Q_pred: np.ndarray   # (T+1, n, n); [0] is the constant Sigma0^{-1}
    P_pred: np.ndarray   # (T+1, n, n); floored inverse of Q_pred
    objective: float
    stats: SolverStats

    def validate(self, scenario: Scenario, tol: float = 1e-6) -> None:
        """Assert simplex, coupling, and block residuals at tolerance."""
        T, n = scenario.T, scenario.n
        if self.theta.min() < -tol:
            raise ValidationError(f"theta has weight {self.theta.min():.3e} < -{tol}")
        gaps = np.abs(self.theta.sum(axis=1) - 1.0)
        if gaps.max() > tol:
            raise ValidationError(f"theta row sum off by {gaps.max():.3e}")
        eye = np.eye(n)
        for t in range(T + 1):
            R = info_increments(scenario.sensor_set, t)
            mix = sum(self.theta[t, i] * R[i] for i in range(scenario.N))
            res = np.linalg.norm(self.Q[t] - self.Q_pred[t] - mix, "fro")
            if res > tol:
                raise ValidationError(f"coupling residual {res:.3e} at t={t}")
            blk = np.block([[self.P[t], eye], [eye, self.Q[t]]])
            ev = np.linalg.eigvalsh(_sym(blk))[0]
            if ev < -tol:
                raise ValidationError(f"inverse-pair block eig {ev:.3e} at t={t}")
        Winv = _sym(np.linalg.inv(scenario.system.W))
        for t in range(1, T + 1):
            A_t = scenario.system.dyn(t - 1)
            WiA = Winv @ A_t
            blk = np.block(
                [
                    [Winv - self.Q_pred[t], WiA],
                    [WiA.T, self.Q[t - 1] + _sym(A_t.T @ WiA)],
                ]
            )
            ev = np.linalg.eigvalsh(_sym(blk))[0]
            if ev < -tol:
                raise ValidationError(f"prediction block eig {ev:.3e} at t={t}")


def _floored_inverse(M: np.ndarray, floor: float = 1e-9) -> np.ndarray:
    w, U = np.linalg.eigh(_sym(M))
    return _sym((U / np.clip(w, floor, None)) @ U.T)


def _status_from_clarabel(raw: str) -> str:
    if raw == "Solved":
        return "optimal"
    if raw == "AlmostSolved":
        return "near-optimal"
    if "Infeasible" in raw:
        return "infeasible"
    return "failure"


def _status_from_scs(raw: str) -> str:
    low = raw.lower()
    if "infeasible" in low or "unbounded" in low:
        return "infeasible"
    if "solved" in low:
        return "near-optimal" if "inaccurate" in low else "optimal"
    return "failure"


def _solve_clarabel(prog: ConicProgram, tol: float, verbose: bool, max_iters: int):
    import clarabel

    big = prog.psd_orders[0] if prog.psd_orders else 0
    # clarabel packs PSD triangles column-major; permute each block's rows
    perm = np.arange(prog.A_cone.shape[0])
    if big:
        mine_idx = {ij: k for k, ij in enumerate(zip(*_triu(big)[0]))}
        col_major = [(i, j) for j in range(big) for i in range(j + 1)]
        block_perm = np.array([mine_idx[ij] for ij in col_major])
        Lbig = block_perm.size
        off = prog.num_nonneg
        for _order in prog.psd_orders:
            perm[off : off + Lbig] = off + block_perm
            off += Lbig
    A = sp.vstack([prog.A_eq, prog.A_cone[perm, :]], format="csc")
    b = np.concatenate([prog.b_eq, prog.b_cone[perm]])
    cones = [
        clarabel.ZeroConeT(prog.A_eq.shape[0]),
        clarabel.NonnegativeConeT(prog.num_nonneg),
    ] + [clarabel.PSDTriangleConeT(o) for o in prog.psd_orders]
    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    settings.max_iter = max_iters
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol
    P0 = sp.csc_matrix((prog.num_vars, prog.num_vars))
    solver = clarabel.DefaultSolver(P0, prog.c, A, b, cones, settings)
    t0 = time.perf_counter()
    sol = solver.solve()
    dt = time.perf_counter() - t0
    raw = str(sol.status)
    stats = SolverStats(
        status=_status_from_clarabel(raw),
        raw_status=raw,
        iterations=int(sol.iterations),
        solve_time=dt,
        primal_res=float(sol.r_prim),
        dual_res=float(sol.r_dual),
        objective=float(sol.obj_val),
    )
    return np.asarray(sol.x), stats


def _solve_scs(prog: ConicProgram, tol: float, verbose: bool, max_iters: int):
    import scs

    A = sp.vstack([prog.A_eq, prog.A_cone], format="csc")
    b = np.concatenate([prog.b_eq, prog.b_cone])
    cone = dict(z=prog.A_eq.shape[0], l=prog.num_nonneg, s=list(prog.psd_orders))
    t0 = time.perf_counter()
    out = scs.solve(
        dict(A=A, b=b, c=prog.c),
        cone,
        verbose=verbose,
        eps_abs=tol,
        eps_rel=tol,
        max_iters=max_iters,
    )
    dt = time.perf_counter() - t0
    info = out["info"]
    raw = str(info["status"])
    stats = SolverStats(
        status=_status_from_scs(raw),
        raw_status=raw,
        iterations=int(info["iter"]),
        solve_time=dt,
        primal_res=float(info["res_pri"]),
        dual_res=float(info["res_dual"]),
        objective=float(info["pobj"]),
    )
    return np.asarray(out["x"]), stats


_BACKENDS = {"clarabel": _solve_clarabel, "scs": _solve_scs}


def _check_residuals(prog: ConicProgram, x: np.ndarray, tol: float = 1e-6) -> None:
    """Program-level invariant check on a candidate solution vector.

    Equality residuals are checked per constraint group (so the coupling
    check is the Frobenius residual of each step's matrix equation, svec
    being an isometry); every PSD slack block must be PSD within -tol.
    """
    n, N, T = prog.dims
    L = n * (n + 1) // 2
    r_eq = prog.A_eq @ x - prog.b_eq
    pos = 0
    for t in range(T + 1):
        res = np.linalg.norm(r_eq[pos : pos + L])
        if res > tol:
            raise SolverFailure(f"coupling residual {res:.3e} at t={t}")
        if abs(r_eq[pos + L]) > tol:
            raise SolverFailure(f"simplex residual {abs(r_eq[pos + L]):.3e} at t={t}")
        pos += L + 1
    s = prog.b_cone - prog.A_cone @ x
    if prog.num_nonneg and s[: prog.num_nonneg].min() < -tol:
        raise SolverFailure(
            f"weight bound violated by {-s[: prog.num_nonneg].min():.3e}"
        )
    off = prog.num_nonneg
    for k, order in enumerate(prog.psd_orders):
        Lb = order * (order + 1) // 2
        ev = np.linalg.eigvalsh(unsvec(s[off : off + Lb], order))[0]
        if ev < -tol:
            raise SolverFailure(f"PSD block {k} has eigenvalue {ev:.3e}")
        off += Lb


def solve_relaxation(
    prog: ConicProgram,
    tol: float = 1e-7,
    solver: str = "clarabel",
    verbose: bool = False,
    max_iters: int = 100000,
) -> RelaxedSolution:
    """Solve an assembled relaxation and extract the matrix trajectories.

    Raises SolverFailure when the backend reports infeasibility (a contract
    violation for valid scenarios), stops without a solution, or returns a
    point violating the program's own invariants at 1e-6.
    """
    if solver not in _BACKENDS:
        raise ParameterError(f"unknown solver '{solver}', have {sorted(_BACKENDS)}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    x, stats = _BACKENDS[solver](prog, tol, verbose, max_iters)
    if stats.status in ("infeasible", "failure"):
        raise SolverFailure(
            f"relaxation solve ended with status '{stats.raw_status}' "
            f"(primal res {stats.primal_res}, dual res {stats.dual_res})",
            stats=stats,
        )
    _check_residuals(prog, x)
    n, N, T = prog.dims
    L = n * (n + 1) // 2
    theta = np.empty((T + 1, N))
    P = np.empty((T + 1, n, n))
    Q = np.empty((T + 1, n, n))
    Q_pred = np.empty((T + 1, n, n))
    Q_pred[0] = unsvec(prog.b_eq[:L], n)  # the substituted constant
    for t in range(T + 1):
        theta[t] = x[prog.var_slice("theta", t)]
        P[t] = unsvec(x[prog.var_slice("P", t)], n)
        Q[t] = unsvec(x[prog.var_slice("Q", t)], n)
        if t >= 1:
            Q_pred[t] = unsvec(x[prog.var_slice("Q_pred", t)], n)
    P_pred = np.stack([_floored_inverse(Q_pred[t]) for t in range(T + 1)])
    objective = float(np.trace(P, axis1=1, axis2=2).sum())
    return RelaxedSolution(
        theta=theta, P=P, Q=Q, Q_pred=Q_pred, P_pred=P_pred,
        objective=objective, stats=stats,
    )


@dataclass(frozen=True)
class TightenedTuple:
    """Slack-free trajectories rebuilt from a relaxed solution."""

    P: np.ndarray
    Q: np.ndarray
    Q_pred: np.ndarray
    cost: float


def tighten(scenario: Scenario, loose) -> TightenedTuple:
    """Remove block slack without increasing the trace objective.

    Keeps each step's information gain R_t = Q_t - Q_{t|t-1} but replays the
    exact recursion through it: starting from the same initial predicted
    information, each filtered matrix becomes the true inverse and each
    predicted matrix the true time update of its predecessor. The rebuilt
    trajectory dominates the input (P_bar_t <= P_t in the PSD order), so the
    cost never increases.

    `loose` is anything with stacked attributes P, Q, Q_pred, or a
    (P, Q, Q_pred) triple of arrays.
    """
    if isinstance(loose, tuple):
        P_in, Q_in, Qp_in = (np.asarray(a, dtype=float) for a in loose)
    else:
        P_in, Q_in, Qp_in = loose.P, loose.Q, loose.Q_pred
    T = scenario.T
    n = scenario.n
    if Q_in.shape != (T + 1, n, n) or Qp_in.shape != (T + 1, n, n):
        raise ParameterError(
            f"expected (T+1, n, n) = ({T + 1}, {n}, {n}) stacks, got {Q_in.shape}"
        )
    eye = np.eye(n)
    P_bar = np.empty((T + 1, n, n))
    Q_bar = np.empty((T + 1, n, n))
    Qp_bar = np.empty((T + 1, n, n))
    Qp_bar[0] = Qp_in[0]
    for t in range(T + 1):
        gain = Q_in[t] - Qp_in[t]
        Q_bar[t] = _sym(Qp_bar[t] + gain)
        try:
            P_bar[t] = _sym(cho_solve(cho_factor(Q_bar[t], lower=True), eye))
        except np.linalg.LinAlgError:
            raise ConditioningError(
                f"tightened information matrix singular at t={t}", t=t
            ) from None
        if t < T:
            Pp = h_update(scenario.system, t + 1, P_bar[t])
            try:
                Qp_bar[t + 1] = _sym(cho_solve(cho_factor(Pp, lower=True), eye))
            except np.linalg.LinAlgError:
                raise ConditioningError(
                    f"tightened predicted covariance singular at t={t + 1}", t=t + 1
                ) from None
    cost = float(np.trace(P_bar, axis1=1, axis2=2).sum())
    return TightenedTuple(P=P_bar, Q=Q_bar, Q_pred=Qp_bar, cost=cost)


def evaluate_theta(scenario: Scenario, theta) -> CovTrajectory:
    """Exact filter recursion under blended per-step sensor weights.

    Each step fuses the convex combination sum_i theta^i_t R^i_t in
    information form: Q_t = (h_t(P_{t-1}))^{-1} + R_t(theta). Rows are
    clipped to the simplex; rows off by more than 1e-6 are rejected.
    """
    theta = np.asarray(theta, dtype=float)
    T, N, n = scenario.T, scenario.N, scenario.n
    if theta.shape != (T + 1, N):
        raise ParameterError(f"theta must be ({T + 1}, {N}), got {theta.shape}")
    if theta.min() < -1e-6 or np.abs(theta.sum(axis=1) - 1.0).max() > 1e-6:
        raise ParameterError("theta rows must lie on the simplex within 1e-6")
    theta = np.clip(theta, 0.0, None)
    theta = theta / theta.sum(axis=1, keepdims=True)
    eye = np.eye(n)
    filtered = np.empty((T + 1, n, n))
    predicted = np.empty((T + 1, n, n))
    Ppred = scenario.system.Sigma0
    cost = 0.0
    for t in range(T + 1):
        predicted[t] = Ppred
        R = info_increments(scenario.sensor_set, t)
        mix = sum(theta[t, i] * R[i] for i in range(N))
        Qp = cho_solve(cho_factor(_sym(Ppred), lower=True), eye)
        Qt = _sym(Qp + mix)
        P = _sym(cho_solve(cho_factor(Qt, lower=True), eye))
        filtered[t] = P
        cost += float(np.trace(P))
        if t < T:
            Ppred = h_update(scenario.system, t + 1, P)
    return CovTrajectory(filtered=filtered, predicted=predicted, cost=cost)


# --- solution documents -----------------------------------------------------

def save_solution(sol: RelaxedSolution, path) -> None:
    """Write the weight table and matrix blocks as a JSON document."""
    doc = {
        "version": 1,
        "objective": sol.objective,
        "status": sol.stats.status,
        "theta": sol.theta.tolist(),
        "P": sol.P.tolist(),
        "Q": sol.Q.tolist(),
        "Q_pred": sol.Q_pred.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_solution(path) -> RelaxedSolution:
    """Read a solution document written by save_solution."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not a valid solution document: {e}") from None
    for name in ("version", "objective", "status", "theta", "P", "Q", "Q_pred"):
        if name not in doc:
            raise SchemaError(f"missing required field '{name}'")
    if doc["version"] != 1:
        raise SchemaError(f"field 'version' is {doc['version']!r}, expected 1")
    theta = np.asarray(doc["theta"], dtype=float)
    P = np.asarray(doc["P"], dtype=float)
    Q = np.asarray(doc["Q"], dtype=float)
    Q_pred = np.asarray(doc["Q_pred"], dtype=float)
    P_pred = np.stack([_floored_inverse(Q_pred[t]) for t in range(Q_pred.shape[0])])
    stats = SolverStats(
        status=str(doc["status"]), raw_status="loaded", iterations=None,
        solve_time=None, primal_res=None, dual_res=None,
        objective=float(doc["objective"]),
    )
    return RelaxedSolution(
        theta=theta, P=P, Q=Q, Q_pred=Q_pred, P_pred=P_pred,
        objective=float(doc["objective"]), stats=stats,
    )
