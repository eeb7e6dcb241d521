from __future__ import annotations

import numpy as np
import pytest

from covsched import Scenario, Sensor, SensorSet, SystemModel


def rand_pd(rng, n, scale=1.0):
    """Random symmetric positive-definite matrix with eigenvalues >= 0.1."""
    G = rng.standard_normal((n, n))
    return scale * (G @ G.T / n + 0.1 * np.eye(n))


def rand_psd(rng, n, scale=1.0):
    G = rng.standard_normal((n, n))
    return scale * (G @ G.T) / n


def scalar_two_sensor(T=1):
    """1-d plant (A=W=Sigma0=1) with unit-gain sensors of variance 1 and 3."""
    system = SystemModel(
        T=T, A=np.array([[1.0]]), W=np.array([[1.0]]),
        mu0=np.zeros(1), Sigma0=np.array([[1.0]]),
    )
    sensors = SensorSet((
        Sensor(C=np.array([[1.0]]), V=np.array([[1.0]])),
        Sensor(C=np.array([[1.0]]), V=np.array([[3.0]])),
    ))
    return Scenario(system=system, sensor_set=sensors)


@pytest.fixture
def scalar_scenario():
    return scalar_two_sensor(T=1)
