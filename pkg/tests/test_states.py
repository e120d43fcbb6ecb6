import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from qmpemba import (
    ModelParams,
    NegativeTemperatureError,
    OutOfSpectrumError,
    ParameterError,
    StateSpec,
    build_hamiltonian,
    diagonalize,
    effective_temperature,
    frobenius_distance,
    maximally_mixed,
    pure_state_density,
    thermal_state,
    validate_density,
)
from qmpemba.states import log_partition_function, thermal_energy

SPEC12 = diagonalize(build_hamiltonian(ModelParams(V=1.4, J=1.0, beta=4 * math.pi**2, alpha=0.7, L=12)))


def test_maximally_mixed():
    rho = maximally_mixed(5)
    np.testing.assert_allclose(rho, np.eye(5) / 5)
    assert validate_density(rho).ok


def test_pure_state_density_normalizes_and_checks():
    v = np.array([1.0, 1j, 0.0])
    rho = pure_state_density(v / np.linalg.norm(v))
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-15)
    assert np.trace(rho).real == pytest.approx(1)


def test_thermal_state_limits():
    # high T -> I/L, low T -> ground-state projector
    np.testing.assert_allclose(thermal_state(SPEC12, 1e8), np.eye(12) / 12, atol=1e-8)
    g = pure_state_density(SPEC12.state(1))
    np.testing.assert_allclose(thermal_state(SPEC12, 1e-3), g, atol=1e-12)


def test_thermal_state_matches_expm():
    from scipy.linalg import expm

    H = build_hamiltonian(ModelParams(V=1.4, J=1.0, beta=4 * math.pi**2, alpha=0.7, L=12))
    T = 0.37
    ref = expm(-H / T)
    ref /= np.trace(ref)
    np.testing.assert_allclose(thermal_state(SPEC12, T), ref, atol=1e-12)
    assert log_partition_function(SPEC12, T) == pytest.approx(math.log(np.trace(expm(-H / T))), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=50.0))
def test_effective_temperature_round_trip(T):
    E = thermal_energy(SPEC12, T)
    assert effective_temperature(SPEC12, E) == pytest.approx(T, rel=1e-7)


def test_effective_temperature_errors():
    E = SPEC12.energies
    with pytest.raises(OutOfSpectrumError):
        effective_temperature(SPEC12, E[0] - 0.1)
    with pytest.raises(NegativeTemperatureError):
        effective_temperature(SPEC12, SPEC12.mean_energy + 0.1)
    with pytest.raises(ParameterError):
        thermal_state(SPEC12, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=2, max_value=20), st.integers(min_value=0, max_value=2**31))
def test_distance_identity(L, seed):
    # ||rho - I/L||_F^2 = Tr(rho^2) - 1/L for any unit-trace rho
    rho = random_density(L, np.random.default_rng(seed))
    purity = np.trace(rho @ rho).real
    assert frobenius_distance(rho, maximally_mixed(L)) == pytest.approx(math.sqrt(purity - 1 / L), rel=1e-10)


def test_validate_density_flags_defects():
    bad = np.diag([1.2, -0.2])
    rep = validate_density(bad)
    assert rep.min_eig == pytest.approx(-0.2)
    assert not rep.ok
    nonherm = np.array([[0.5, 0.1], [0.0, 0.5]])
    assert validate_density(nonherm).herm_defect == pytest.approx(0.1)


def test_state_spec():
    assert StateSpec("eigenstate", 3).label == "m3"
    assert StateSpec("thermal", 0.25).label == "T0.25"
    assert StateSpec("site", 2).label == "site2"
    assert StateSpec("mixed").label == "mixed"
    with pytest.raises(ParameterError):
        StateSpec("eigenstate", 0)
    with pytest.raises(ParameterError):
        StateSpec("thermal", 0.0)
    with pytest.raises(ParameterError):
        StateSpec("eigenstate", 13).density(SPEC12)
    site = StateSpec("site", 4).density(SPEC12)
    assert site[3, 3] == 1 and np.count_nonzero(site) == 1
