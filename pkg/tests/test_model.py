from __future__ import annotations

import json

import numpy as np
import pytest

from covsched import (
    ParameterError,
    Scenario,
    Schedule,
    SchemaError,
    Sensor,
    SensorSet,
    SystemModel,
    ValidationError,
    generate_scenario,
    info_increments,
    load_scenario,
    save_scenario,
    scenarios_equal,
    slice_scenario,
)


def test_generate_is_deterministic():
    a = generate_scenario(3, 2, 5, seed=42)
    b = generate_scenario(3, 2, 5, seed=42)
    assert scenarios_equal(a, b)
    assert np.array_equal(a.system.A, b.system.A)
    assert np.array_equal(a.sensor_set.sensors[1].V, b.sensor_set.sensors[1].V)


def test_generate_seed_changes_draw():
    a = generate_scenario(3, 2, 5, seed=1)
    b = generate_scenario(3, 2, 5, seed=2)
    assert not scenarios_equal(a, b)


def test_generated_dynamics_eigenvalues_in_range():
    for seed in range(6):
        scen = generate_scenario(4, 3, 7, seed=seed, eig_range=(1.0, 1.5))
        A = scen.system.A
        assert np.allclose(A, A.T)
        eigs = np.linalg.eigvalsh(A)
        assert eigs.min() >= 1.0 - 1e-9
        assert eigs.max() <= 1.5 + 1e-9


def test_generated_noise_respects_floor():
    scen = generate_scenario(5, 4, 3, seed=7, noise_floor=0.25)
    for s in scen.sensor_set.sensors:
        d = np.diag(s.V)
        assert d.min() >= 0.25 - 1e-12
        assert np.allclose(s.V, np.diag(d))
        # sensor row counts stay within 1..n
        assert 1 <= s.C.shape[0] <= 5
        assert s.C.shape[1] == 5
    assert np.linalg.eigvalsh(scen.system.W).min() > 0
    assert np.linalg.eigvalsh(scen.system.Sigma0).min() > 0


def test_generate_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        generate_scenario(0, 2, 5, seed=0)
    with pytest.raises(ParameterError):
        generate_scenario(2, 0, 5, seed=0)
    with pytest.raises(ParameterError):
        generate_scenario(2, 2, -1, seed=0)
    with pytest.raises(ParameterError):
        generate_scenario(2, 2, 5, seed=0, eig_range=(1.5, 1.0))
    with pytest.raises(ParameterError):
        generate_scenario(2, 2, 5, seed=0, eig_range=(0.0, 1.0))
    with pytest.raises(ParameterError):
        generate_scenario(2, 2, 5, seed=0, noise_floor=0.0)


def test_info_increment_scalar():
    ss = SensorSet((Sensor(C=np.array([[1.0]]), V=np.array([[1.0]])),))
    R = info_increments(ss, 0)
    assert np.allclose(R[0], [[1.0]])


def test_info_increment_partial_observation():
    ss = SensorSet((Sensor(C=np.array([[1.0, 0.0]]), V=np.array([[2.0]])),))
    R = info_increments(ss, 3)[0]
    assert np.allclose(R, [[0.5, 0.0], [0.0, 0.0]])


def test_info_increment_zero_gain():
    ss = SensorSet((Sensor(C=np.zeros((1, 2)), V=np.array([[1.0]])),))
    assert np.allclose(info_increments(ss, 0)[0], np.zeros((2, 2)))


def test_info_increment_cached_for_static_sensor():
    ss = SensorSet((Sensor(C=np.array([[1.0, 0.0]]), V=np.array([[2.0]])),))
    first = ss.increment(0, 0)
    second = ss.increment(0, 5)
    assert first is second


def test_scenario_round_trip(tmp_path):
    scen = generate_scenario(3, 3, 6, seed=9)
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert scenarios_equal(scen, back)
    assert back.seed == 9


def test_load_reports_missing_field(tmp_path):
    scen = generate_scenario(2, 2, 3, seed=0)
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    doc = json.loads(path.read_text())
    del doc["T"]
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="T"):
        load_scenario(path)


def test_load_rejects_unparsable(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_scenario(path)


def test_load_rejects_indefinite_noise(tmp_path):
    scen = generate_scenario(2, 2, 3, seed=0)
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    doc = json.loads(path.read_text())
    doc["W"] = [[1.0, 0.0], [0.0, -1.0]]
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError):
        load_scenario(path)


def test_load_rejects_sensor_width_mismatch(tmp_path):
    scen = generate_scenario(2, 2, 3, seed=0)
    path = tmp_path / "scen.json"
    save_scenario(scen, path)
    doc = json.loads(path.read_text())
    doc["sensors"][0]["C"] = [[1.0, 0.0, 0.0]]
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError):
        load_scenario(path)


def test_system_model_rejects_bad_shapes():
    eye = np.eye(2)
    with pytest.raises(ValidationError):
        SystemModel(T=2, A=np.ones((2, 3)), W=eye, mu0=np.zeros(2), Sigma0=eye)
    with pytest.raises(ValidationError):
        SystemModel(T=2, A=eye, W=eye, mu0=np.zeros(3), Sigma0=eye)
    with pytest.raises(ValidationError):
        SystemModel(T=2, A=eye, W=np.array([[1.0, 0.5], [0.4, 1.0]]),
                    mu0=np.zeros(2), Sigma0=eye)


def test_dynamics_lookup_bounds():
    scen = generate_scenario(2, 2, 3, seed=0)
    scen.system.dyn(0)
    scen.system.dyn(2)
    with pytest.raises(ParameterError):
        scen.system.dyn(3)
    with pytest.raises(ParameterError):
        scen.system.dyn(-1)


def test_schedule_validation():
    scen = generate_scenario(2, 2, 3, seed=0)
    Schedule((1, 2, 1, 2)).validate(scen)
    with pytest.raises(ValidationError):
        Schedule((1, 2, 1)).validate(scen)
    with pytest.raises(ValidationError):
        Schedule((1, 2, 1, 3)).validate(scen)
    with pytest.raises(ValidationError):
        Schedule((0, 1, 1, 1)).validate(scen)


def test_slice_scenario_window():
    scen = generate_scenario(3, 2, 8, seed=4)
    prior = np.eye(3) * 2.0
    sub = slice_scenario(scen, 2, 4, prior_cov=prior)
    assert sub.T == 4
    assert sub.n == 3
    assert np.allclose(sub.system.Sigma0, prior)
    assert np.allclose(sub.system.dyn(0), scen.system.dyn(2))
    with pytest.raises(ParameterError):
        slice_scenario(scen, 7, 4)


def test_arrays_are_frozen():
    scen = generate_scenario(2, 2, 3, seed=0)
    with pytest.raises(ValueError):
        scen.system.A[0, 0] = 99.0
