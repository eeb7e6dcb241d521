"""Covariance kernel: measurement update, time update, schedule evaluation.

The two maps everything else is built from:

    g(i, M) = M - M C' (C M C' + V)^{-1} C M     (measurement update)
    h_t(M)  = A_{t-1} M A_{t-1}' + W             (time update)

plus the information-form variant of g (additive in C' V^{-1} C, used for
cross-checks and for blended sensor weights) and the first-order derivative
factor H of g. All outputs are symmetrized; inputs are accepted as PSD down
to an eigenvalue slack of -1e-8 and clipped to the PSD cone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError, ParameterError, ValidationError
from .model import Scenario, Sensor, SystemModel, as_schedule

PSD_SLACK = 1e-8


def _sym(M):
    return 0.5 * (M + M.T)


def _accept_psd(M: np.ndarray, what: str) -> np.ndarray:
    """Symmetrize and clip tiny negative eigenvalues; reject real ones."""
    M = _sym(np.asarray(M, dtype=float))
    w, U = np.linalg.eigh(M)
    if w[0] < -PSD_SLACK:
        raise DomainError(f"{what} is not PSD (min eigenvalue {w[0]:.3e})")
    if w[0] < 0.0:
        M = _sym((U * np.clip(w, 0.0, None)) @ U.T)
    return M


def g_update(sensor: Sensor, t: int, M: np.ndarray) -> np.ndarray:
    """Measurement update: covariance after fusing one observation.

    Returns M - M C' (C M C' + V)^{-1} C M, symmetrized. The innovation
    system is solved through a Cholesky factorization; no explicit inverse.
    The result never exceeds M in the PSD order.
    """
    M = _accept_psd(M, "covariance input to g_update")
    C = sensor.obs(t)
    S = C @ M @ C.T + sensor.V
    CM = C @ M
    X = cho_solve(cho_factor(_sym(S), lower=True), CM)
    return _sym(M - CM.T @ X)


def g_update_info(sensor: Sensor, t: int, M: np.ndarray, require_pd: bool = True) -> np.ndarray:
    """Information-form measurement update: (M^{-1} + C' V^{-1} C)^{-1}.

    Agrees with g_update on positive-definite M; kept as an independent
    cross-check path. With require_pd the inverse of M must exist, otherwise
    eigenvalues below 1e-12 are floored before inverting.
    """
    M = _accept_psd(M, "covariance input to g_update_info")
    n = M.shape[0]
    C = sensor.obs(t)
    R = C.T @ np.linalg.solve(sensor.V, C)
    if require_pd:
        try:
            Minv = cho_solve(cho_factor(M, lower=True), np.eye(n))
        except np.linalg.LinAlgError:
            raise DomainError("singular covariance in g_update_info") from None
    else:
        w, U = np.linalg.eigh(M)
        Minv = (U / np.clip(w, 1e-12, None)) @ U.T
    Q = _sym(Minv + R)
    return _sym(cho_solve(cho_factor(Q, lower=True), np.eye(n)))


def h_update(system: SystemModel, t: int, M: np.ndarray) -> np.ndarray:
    """Time update from step t-1 to t: A_{t-1} M A_{t-1}' + W."""
    if not 1 <= t <= system.T:
        raise ParameterError(f"h defined for t in [1, {system.T}], got {t}")
    M = _accept_psd(M, "covariance input to h_update")
    A = system.dyn(t - 1)
    return _sym(A @ M @ A.T + system.W)


def jacobian_H(sensor: Sensor, t: int, M: np.ndarray) -> np.ndarray:
    """Derivative factor of the measurement update at M.

    H = I - M C' (C M C' + V)^{-1} C, so that the directional derivative of
    g at M along a symmetric L is H L H'.
    """
    M = _accept_psd(M, "covariance input to jacobian_H")
    n = M.shape[0]
    C = sensor.obs(t)
    S = C @ M @ C.T + sensor.V
    X = cho_solve(cho_factor(_sym(S), lower=True), C)
    return np.eye(n) - M @ C.T @ X


@dataclass(frozen=True)
class CovTrajectory:
    """Filtered and predicted covariances over t = 0..T plus the trace cost."""

    filtered: np.ndarray   # (T+1, n, n), P_t
    predicted: np.ndarray  # (T+1, n, n), P_{t|t-1} with predicted[0] the prior
    cost: float

    def check(self, tol_sym: float = 1e-9, tol_order: float = 1e-8) -> None:
        """Assert the structural invariants; raises ValidationError."""
        for name, arr in (("filtered", self.filtered), ("predicted", self.predicted)):
            gap = np.abs(arr - np.transpose(arr, (0, 2, 1))).max()
            if gap > tol_sym:
                raise ValidationError(f"{name} covariances asymmetric by {gap:.3e}")
        for t in range(self.filtered.shape[0]):
            d = np.linalg.eigvalsh(self.predicted[t] - self.filtered[t])[0]
            if d < -tol_order:
                raise ValidationError(
                    f"filtered covariance exceeds predicted at t={t} (eig {d:.3e})"
                )
        total = float(np.trace(self.filtered, axis1=1, axis2=2).sum())
        if abs(total - self.cost) > 1e-9 * max(1.0, abs(total)):
            raise ValidationError("stored cost disagrees with trace sum")


@dataclass(frozen=True)
class InfoTrajectory:
    """Inverse-covariance view of a trajectory: Q_t and Q_{t|t-1}."""

    Q: np.ndarray
    Q_pred: np.ndarray

    @classmethod
    def from_cov(cls, traj: CovTrajectory) -> "InfoTrajectory":
        Q = np.stack([_sym(np.linalg.inv(P)) for P in traj.filtered])
        Qp = np.stack([_sym(np.linalg.inv(P)) for P in traj.predicted])
        return cls(Q=Q, Q_pred=Qp)


def evaluate_schedule(scenario: Scenario, schedule, symmetrize: bool = True) -> CovTrajectory:
    """Run the filter covariance recursion under an integer schedule.

    P_{0|-1} = Sigma0; P_t = g(sigma(t), P_{t|t-1}); P_{t+1|t} = h_{t+1}(P_t);
    cost = sum_t tr(P_t). Errors from the underlying maps are re-raised with
    the failing step attached.
    """
    sched = as_schedule(schedule)
    sched.validate(scenario)
    sys0 = scenario.system
    sensors = scenario.sensor_set.sensors
    T, n = sys0.T, sys0.n
    filtered = np.empty((T + 1, n, n))
    predicted = np.empty((T + 1, n, n))
    Ppred = sys0.Sigma0
    cost = 0.0
    for t in range(T + 1):
        predicted[t] = Ppred
        try:
            if symmetrize:
                P = g_update(sensors[sched[t] - 1], t, Ppred)
            else:
                sensor = sensors[sched[t] - 1]
                C = sensor.obs(t)
                S = C @ Ppred @ C.T + sensor.V
                CM = C @ Ppred
                P = Ppred - CM.T @ cho_solve(cho_factor(S, lower=True), CM)
        except DomainError as e:
            raise DomainError(f"t={t}: {e}") from None
        filtered[t] = P
        cost += float(np.trace(P))
        if t < T:
            if symmetrize:
                Ppred = h_update(sys0, t + 1, P)
            else:
                A = sys0.dyn(t)
                Ppred = A @ P @ A.T + sys0.W
    return CovTrajectory(filtered=filtered, predicted=predicted, cost=cost)


# --- batched kernels (no validation; internal fast path) --------------------

def g_batch(C: np.ndarray, V: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Measurement update applied to a stack P of shape (B, n, n)."""
    CP = C @ P                       # (B, m, n) by broadcasting
    S = CP @ C.T + V
    X = np.linalg.solve(S, CP)
    Pn = P - np.transpose(CP, (0, 2, 1)) @ X
    return 0.5 * (Pn + np.transpose(Pn, (0, 2, 1)))


def h_batch(A: np.ndarray, W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Time update applied to a stack P of shape (B, n, n)."""
    Pn = A @ P @ A.T + W
    return 0.5 * (Pn + np.transpose(Pn, (0, 2, 1)))
