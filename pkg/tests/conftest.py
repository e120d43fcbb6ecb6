import math

import numpy as np
import pytest

from qmpemba import DissipationSpec, ModelParams, build_hamiltonian, build_liouvillian, diagonalize, spectral_decomposition

FIG_PARAMS = ModelParams(V=1.4, J=1.0, beta=4 * math.pi**2, alpha=0.7, L=35)


def random_density(L, rng, rank=None):
    """Random full-rank (or given rank) density matrix."""
    k = L if rank is None else rank
    A = rng.normal(size=(L, k)) + 1j * rng.normal(size=(L, k))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="session")
def fig_params():
    return FIG_PARAMS


@pytest.fixture(scope="session")
def fig_hspec():
    return diagonalize(build_hamiltonian(FIG_PARAMS))


@pytest.fixture(scope="session")
def fig_lspec():
    """Dense Liouvillian spectrum at the reference parameters, Gamma = 1."""
    H = build_hamiltonian(FIG_PARAMS)
    return spectral_decomposition(build_liouvillian(H, DissipationSpec(1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the summary prints them all at the end."""

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
