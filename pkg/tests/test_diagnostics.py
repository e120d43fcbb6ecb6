import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from qmpemba import (
    DissipationSpec,
    InsufficientDataError,
    ModelParams,
    build_hamiltonian,
    build_liouvillian,
    detect_crossing,
    mode_overlap,
    slowest_mode,
    slowest_overlap,
    spectral_decomposition,
)
from qmpemba.diagnostics import inverse_mpemba

T = np.linspace(0, 20, 201)


def test_single_crossing_located():
    Da = np.exp(-0.5 * T)
    Db = 0.6 * np.exp(-0.2 * T)
    # exp(-0.5 t) = 0.6 exp(-0.2 t) at t = ln(1/0.6)/0.3
    res = detect_crossing(Da, Db, T)
    assert res.exists
    assert res.t_cross == pytest.approx(math.log(1 / 0.6) / 0.3, abs=1e-3)
    assert res.final_sign < 0
    assert inverse_mpemba(res)


def test_refinement_with_exact_difference():
    f = lambda t: math.exp(-0.5 * t) - 0.6 * math.exp(-0.2 * t)
    Da, Db = np.exp(-0.5 * T), 0.6 * np.exp(-0.2 * T)
    res = detect_crossing(Da, Db, T, difference=f, xtol=1e-10)
    assert res.t_cross == pytest.approx(math.log(1 / 0.6) / 0.3, abs=1e-8)


def test_no_crossing_and_shared_start_ignored():
    Da = np.exp(-0.1 * T)
    Db = np.exp(-0.3 * T)  # equal at t = 0 only
    res = detect_crossing(Da, Db, T)
    assert not res.exists and res.t_cross is None
    assert not inverse_mpemba(res)


def test_too_few_samples():
    with pytest.raises(InsufficientDataError):
        detect_crossing([1.0, 0.5], [0.9, 0.4], [0.0, 1.0])


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0), st.floats(0.2, 5.0))
def test_crossing_antisymmetry(ra, rb, amp):
    Da = np.exp(-ra * T)
    Db = amp * np.exp(-rb * T)
    ab = detect_crossing(Da, Db, T)
    ba = detect_crossing(Db, Da, T)
    assert ab.exists == ba.exists
    if ab.exists:
        assert ab.t_cross == pytest.approx(ba.t_cross, abs=1e-12)
        assert ab.final_sign == -ba.final_sign


@pytest.fixture(scope="module")
def spec8():
    H = build_hamiltonian(ModelParams(V=1.4, J=1.0, beta=4 * math.pi**2, alpha=0.7, L=8))
    return spectral_decomposition(build_liouvillian(H, DissipationSpec(1.0)))


def test_mode_overlap(spec8):
    rng = np.random.default_rng(5)
    rho = random_density(8, rng, rank=1)
    rep = mode_overlap(spec8, rho, "x")
    assert rep.coefficients[0] == pytest.approx(1.0)
    assert rep.residual < 1e-10
    sm = slowest_mode(spec8)
    assert rep.slowest_magnitude == pytest.approx(sm.overlap(rho))
    assert slowest_overlap(sm, rho).slowest_magnitude == pytest.approx(rep.slowest_magnitude)
    mixed = mode_overlap(spec8, np.eye(8) / 8)
    assert mixed.slowest_magnitude < 1e-12
    d = rep.to_dict()
    assert d["label"] == "x"
