"""Plant, sensor, and scenario data model.

A scenario bundles the linear-Gaussian plant

    x_{t+1} = A_t x_t + w_t,      w_t ~ N(0, W),  x_0 ~ N(mu0, Sigma0)

with a bank of N candidate sensors

    y^i_t = C^i_t x_t + v^i_t,    v^i_t ~ N(0, V^i)

of which exactly one is active per time step. Everything here is immutable
after construction; arrays are stored read-only so scenarios can be shared
freely across workers.

Matrices may be given time-invariant (a single 2-d array, broadcast over the
horizon) or time-varying (a stacked 3-d array: A has T slices for t = 0..T-1,
each sensor's C has T+1 slices for t = 0..T).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError, SchemaError, ValidationError

FORMAT_VERSION = 1


def _freeze(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


def _check_spd(M: np.ndarray, name: str, sym_tol: float = 1e-9) -> np.ndarray:
    """Validate symmetric positive-definite; return the symmetrized copy."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {M.shape}")
    if np.linalg.norm(M - M.T) > sym_tol * (1.0 + np.linalg.norm(M)):
        raise ValidationError(f"{name} is not symmetric")
    Ms = 0.5 * (M + M.T)
    try:
        np.linalg.cholesky(Ms)
    except np.linalg.LinAlgError:
        raise ValidationError(f"{name} is not positive definite") from None
    return Ms


@dataclass(frozen=True)
class SystemModel:
    """Plant dynamics, process noise, and prior.

    Parameters
    ----------
    T : int
        Horizon; time steps run t = 0..T.
    A : ndarray
        Dynamics. Either (n, n) time-invariant or (T, n, n) with A[t] applied
        between steps t and t+1.
    W : ndarray
        Process noise covariance, n x n, symmetric positive definite.
    mu0 : ndarray
        Prior mean (length n). Carried for completeness; no covariance
        computation uses it.
    Sigma0 : ndarray
        Prior covariance, n x n, symmetric positive definite.
    """

    T: int
    A: np.ndarray
    W: np.ndarray
    mu0: np.ndarray
    Sigma0: np.ndarray

    def __post_init__(self):
        if not isinstance(self.T, (int, np.integer)) or self.T < 0:
            raise ValidationError(f"T must be a nonnegative integer, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))
        Sigma0 = _check_spd(np.asarray(self.Sigma0, dtype=float), "Sigma0")
        n = Sigma0.shape[0]
        W = _check_spd(np.asarray(self.W, dtype=float), "W")
        if W.shape[0] != n:
            raise ValidationError(f"W has dimension {W.shape[0]}, expected {n}")
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 2:
            if A.shape != (n, n):
                raise ValidationError(f"A must be {n}x{n}, got {A.shape}")
        elif A.ndim == 3:
            if A.shape != (self.T, n, n):
                raise ValidationError(
                    f"time-varying A must have shape ({self.T}, {n}, {n}), got {A.shape}"
                )
        else:
            raise ValidationError("A must be a 2-d or 3-d array")
        mu0 = np.asarray(self.mu0, dtype=float).reshape(-1)
        if mu0.shape != (n,):
            raise ValidationError(f"mu0 must have length {n}, got {mu0.shape}")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "W", _freeze(W))
        object.__setattr__(self, "mu0", _freeze(mu0))
        object.__setattr__(self, "Sigma0", _freeze(Sigma0))

    @property
    def n(self) -> int:
        return self.Sigma0.shape[0]

    def dyn(self, t: int) -> np.ndarray:
        """Dynamics matrix A_t for 0 <= t <= T-1."""
        if not 0 <= t < self.T:
            raise ParameterError(f"A_t defined for t in [0, {self.T - 1}], got {t}")
        return self.A if self.A.ndim == 2 else self.A[t]


@dataclass(frozen=True)
class Sensor:
    """One candidate sensor: observation matrix C and noise covariance V.

    C is (m, n) time-invariant or (T+1, m, n) time-varying; V is m x m
    symmetric positive definite.
    """

    C: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        V = _check_spd(np.asarray(self.V, dtype=float), "V")
        m = V.shape[0]
        C = np.asarray(self.C, dtype=float)
        if C.ndim not in (2, 3):
            raise ValidationError("C must be a 2-d or 3-d array")
        if C.shape[-2] != m:
            raise ValidationError(
                f"C has {C.shape[-2]} rows but V is {m}x{m}"
            )
        object.__setattr__(self, "C", _freeze(C))
        object.__setattr__(self, "V", _freeze(V))

    @property
    def m(self) -> int:
        return self.V.shape[0]

    @property
    def n(self) -> int:
        return self.C.shape[-1]

    def obs(self, t: int) -> np.ndarray:
        """Observation matrix C_t."""
        if self.C.ndim == 2:
            return self.C
        if not 0 <= t < self.C.shape[0]:
            raise ParameterError(f"C_t defined for t in [0, {self.C.shape[0] - 1}], got {t}")
        return self.C[t]


@dataclass(frozen=True)
class SensorSet:
    """Ordered bank of sensors plus cached information increments.

    The information increment of sensor i at time t is
    R^i_t = C^i_t' inv(V^i) C^i_t, the additive contribution one use of the
    sensor makes to the information matrix.
    """

    sensors: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        sensors = tuple(self.sensors)
        if len(sensors) < 1:
            raise ValidationError("a sensor set needs at least one sensor")
        if any(not isinstance(s, Sensor) for s in sensors):
            raise ValidationError("sensor set entries must be Sensor values")
        n = sensors[0].n
        if any(s.n != n for s in sensors):
            raise ValidationError("all sensors must observe the same state dimension")
        object.__setattr__(self, "sensors", sensors)

    @property
    def N(self) -> int:
        return len(self.sensors)

    @property
    def n(self) -> int:
        return self.sensors[0].n

    def increment(self, idx: int, t: int = 0) -> np.ndarray:
        """R^i_t for the 0-based sensor index idx, symmetrized and cached."""
        s = self.sensors[idx]
        key = (idx, 0 if s.C.ndim == 2 else t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        C = s.obs(t)
        R = C.T @ np.linalg.solve(s.V, C)
        R = 0.5 * (R + R.T)
        R = _freeze(R)
        self._cache[key] = R
        return R


def info_increments(sensor_set: SensorSet, t: int = 0) -> list:
    """All sensors' information increments R^i_t at time t (0-based list)."""
    return [sensor_set.increment(i, t) for i in range(sensor_set.N)]


@dataclass(frozen=True)
class Scenario:
    """A system plus its sensor bank; the unit of every computation here.

    seed records the generator seed for generated scenarios and is None for
    hand-authored ones.
    """

    system: SystemModel
    sensor_set: SensorSet
    seed: int | None = None

    def __post_init__(self):
        n = self.system.n
        if self.sensor_set.n != n:
            raise ValidationError(
                f"sensors observe dimension {self.sensor_set.n}, system has {n}"
            )
        T = self.system.T
        for i, s in enumerate(self.sensor_set.sensors):
            if s.C.ndim == 3 and s.C.shape[0] != T + 1:
                raise ValidationError(
                    f"sensor {i + 1}: time-varying C needs {T + 1} slices, got {s.C.shape[0]}"
                )
        if self.seed is not None:
            object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def T(self) -> int:
        return self.system.T

    @property
    def N(self) -> int:
        return self.sensor_set.N


@dataclass(frozen=True)
class Schedule:
    """Integer sensor schedule: choices[t] is the 1-based active sensor at t."""

    choices: tuple

    def __post_init__(self):
        try:
            choices = tuple(int(c) for c in self.choices)
        except (TypeError, ValueError):
            raise ValidationError("schedule entries must be integers") from None
        object.__setattr__(self, "choices", choices)

    def validate(self, scenario: Scenario) -> None:
        T, N = scenario.T, scenario.N
        if len(self.choices) != T + 1:
            raise ValidationError(
                f"schedule has {len(self.choices)} entries, horizon needs {T + 1}"
            )
        for t, c in enumerate(self.choices):
            if not 1 <= c <= N:
                raise ValidationError(f"schedule entry {c} at t={t} outside 1..{N}")

    def __len__(self) -> int:
        return len(self.choices)

    def __getitem__(self, t):
        return self.choices[t]

    def __iter__(self):
        return iter(self.choices)


def as_schedule(obj) -> Schedule:
    """Coerce a Schedule or any integer sequence into a Schedule."""
    if isinstance(obj, Schedule):
        return obj
    return Schedule(tuple(obj))


def generate_scenario(
    n: int,
    num_sensors: int,
    T: int,
    seed: int,
    eig_range: tuple = (1.0, 1.5),
    noise_floor: float = 0.01,
) -> Scenario:
    """Draw a random benchmark scenario, deterministic in seed.

    The dynamics are symmetric, A = U diag(lam) U', with lam i.i.d. uniform in
    eig_range and U a random orthogonal matrix (QR of a standard-normal draw
    with the sign convention fixed so U is unique). W = I, Sigma0 = I,
    mu0 = 0. Each sensor draws a row count m uniform in {1..n}, C with
    standard-normal entries, and a diagonal V with entries uniform in
    [noise_floor, 1).

    Parameters
    ----------
    n : int
        State dimension, >= 1.
    num_sensors : int
        Number of candidate sensors, >= 1.
    T : int
        Horizon, >= 0.
    seed : int
        Generator seed; equal seeds give bit-identical scenarios.
    eig_range : (float, float)
        Closed interval for the dynamics eigenvalues; must satisfy
        0 < lo <= hi.
    noise_floor : float
        Lower bound for sensor noise variances, in (0, 1).
    """
    if n < 1 or num_sensors < 1 or T < 0:
        raise ParameterError(
            f"need n >= 1, num_sensors >= 1, T >= 0; got n={n}, "
            f"num_sensors={num_sensors}, T={T}"
        )
    lo, hi = float(eig_range[0]), float(eig_range[1])
    if not (0.0 < lo <= hi):
        raise ParameterError(f"eig_range must satisfy 0 < lo <= hi, got ({lo}, {hi})")
    if not 0.0 < noise_floor < 1.0:
        raise ParameterError(f"noise_floor must lie in (0, 1), got {noise_floor}")

    rng = np.random.default_rng(seed)
    lam = rng.uniform(lo, hi, size=n)
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.diag(R))  # fix the QR sign ambiguity
    A = Q @ np.diag(lam) @ Q.T
    A = 0.5 * (A + A.T)
    system = SystemModel(T=T, A=A, W=np.eye(n), mu0=np.zeros(n), Sigma0=np.eye(n))
    sensors = []
    for _ in range(num_sensors):
        m = int(rng.integers(1, n + 1))
        C = rng.standard_normal((m, n))
        V = np.diag(rng.uniform(noise_floor, 1.0, size=m))
        sensors.append(Sensor(C=C, V=V))
    return Scenario(system=system, sensor_set=SensorSet(tuple(sensors)), seed=int(seed))


def slice_scenario(scenario: Scenario, start: int, T_new: int, prior_cov=None) -> Scenario:
    """Sub-scenario covering original steps start..start+T_new.

    Time-varying matrices are truncated to the window; prior_cov (default:
    the original Sigma0, only sensible when start == 0) becomes the new
    predicted covariance entering the window. The result carries seed=None.
    """
    sys0 = scenario.system
    if not 0 <= start <= sys0.T:
        raise ParameterError(f"start must lie in [0, {sys0.T}], got {start}")
    if T_new < 0 or start + T_new > sys0.T:
        raise ParameterError(
            f"window start={start}, T_new={T_new} exceeds horizon {sys0.T}"
        )
    A = sys0.A if sys0.A.ndim == 2 else sys0.A[start : start + T_new]
    Sigma0 = sys0.Sigma0 if prior_cov is None else prior_cov
    system = SystemModel(T=T_new, A=A, W=sys0.W, mu0=sys0.mu0, Sigma0=Sigma0)
    sensors = []
    for s in scenario.sensor_set.sensors:
        C = s.C if s.C.ndim == 2 else s.C[start : start + T_new + 1]
        sensors.append(Sensor(C=C, V=s.V))
    return Scenario(system=system, sensor_set=SensorSet(tuple(sensors)), seed=None)


# --- serialization ---------------------------------------------------------

_REQUIRED_FIELDS = ("version", "n", "T", "N", "A", "W", "Sigma0", "mu0", "sensors")


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario as a versioned JSON document (row-major matrices)."""
    sys0 = scenario.system
    doc = {
        "version": FORMAT_VERSION,
        "n": sys0.n,
        "T": sys0.T,
        "N": scenario.sensor_set.N,
        "A": sys0.A.tolist(),
        "W": sys0.W.tolist(),
        "Sigma0": sys0.Sigma0.tolist(),
        "mu0": sys0.mu0.tolist(),
        "sensors": [
            {"C": s.C.tolist(), "V": s.V.tolist()}
            for s in scenario.sensor_set.sensors
        ],
        "seed": scenario.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _field_array(doc, name):
    try:
        return np.asarray(doc[name], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"field '{name}' is not a numeric array") from None


def load_scenario(path) -> Scenario:
    """Read a scenario document; inverse of save_scenario.

    Raises SchemaError when a required field is missing or unparsable and
    ValidationError when the parsed values violate a model invariant.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not a valid scenario document: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in doc:
            raise SchemaError(f"missing required field '{name}'")
    if doc["version"] != FORMAT_VERSION:
        raise SchemaError(
            f"field 'version' is {doc['version']!r}, this reader supports {FORMAT_VERSION}"
        )
    for name in ("n", "T", "N"):
        if not isinstance(doc[name], int):
            raise SchemaError(f"field '{name}' must be an integer")
    A = _field_array(doc, "A")
    W = _field_array(doc, "W")
    Sigma0 = _field_array(doc, "Sigma0")
    mu0 = _field_array(doc, "mu0")
    if not isinstance(doc["sensors"], list):
        raise SchemaError("field 'sensors' must be a list")
    sensors = []
    for i, entry in enumerate(doc["sensors"]):
        if not isinstance(entry, dict) or "C" not in entry or "V" not in entry:
            raise SchemaError(f"field 'sensors[{i}]' needs 'C' and 'V'")
        C = _field_array(entry, "C")
        V = _field_array(entry, "V")
        sensors.append(Sensor(C=C, V=V))
    if len(sensors) != doc["N"]:
        raise ValidationError(
            f"N={doc['N']} but {len(sensors)} sensors are present"
        )
    system = SystemModel(T=doc["T"], A=A, W=W, mu0=mu0, Sigma0=Sigma0)
    if system.n != doc["n"]:
        raise ValidationError(f"n={doc['n']} but matrices have dimension {system.n}")
    seed = doc.get("seed")
    scen = Scenario(system=system, sensor_set=SensorSet(tuple(sensors)), seed=seed)
    return scen


def scenarios_equal(a: Scenario, b: Scenario) -> bool:
    """Field-for-field equality (time-broadcast aware, exact float compare)."""
    if a.T != b.T or a.N != b.N or a.n != b.n or a.seed != b.seed:
        return False
    sa, sb = a.system, b.system
    if not (
        np.array_equal(sa.W, sb.W)
        and np.array_equal(sa.Sigma0, sb.Sigma0)
        and np.array_equal(sa.mu0, sb.mu0)
    ):
        return False
    for t in range(a.T):
        if not np.array_equal(sa.dyn(t), sb.dyn(t)):
            return False
    for x, y in zip(a.sensor_set.sensors, b.sensor_set.sensors):
        if not np.array_equal(x.V, y.V):
            return False
        for t in range(a.T + 1):
            if not np.array_equal(x.obs(t), y.obs(t)):
                return False
    return True
