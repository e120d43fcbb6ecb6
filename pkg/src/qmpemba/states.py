"""Density matrices, thermal states, effective temperatures and the Frobenius distance.

All density matrices are plain ``(L, L)`` complex arrays in the site basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NegativeTemperatureError, OutOfSpectrumError, ParameterError
from .lattice import HamiltonianSpectrum

__all__ = [
    "DensityReport",
    "StateSpec",
    "maximally_mixed",
    "pure_state_density",
    "thermal_weights",
    "thermal_state",
    "thermal_energy",
    "log_partition_function",
    "effective_temperature",
    "frobenius_distance",
    "validate_density",
]

HERM_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
NORM_TOL = 1e-10


@dataclass(frozen=True)
class DensityReport:
    herm_defect: float
    trace_defect: float
    min_eig: float
    herm_tol: float = HERM_TOL
    trace_tol: float = TRACE_TOL
    min_eig_tol: float = POSITIVITY_TOL

    @property
    def ok(self) -> bool:
        return (
            self.herm_defect <= self.herm_tol
            and self.trace_defect <= self.trace_tol
            and self.min_eig >= self.min_eig_tol
        )


def maximally_mixed(L: int) -> np.ndarray:
    """The steady state ``I / L``."""
    if L < 2:
        raise ParameterError(f"L must be >= 2, got {L}")
    return np.eye(L, dtype=complex) / L


def pure_state_density(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ContractError(f"state must be a vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"state is not normalized (norm={norm!r})")
    return np.outer(v, v.conj())


def _check_temperature(T):
    if not isinstance(T, (int, float, np.floating, np.integer)) or not math.isfinite(T) or T <= 0:
        raise ParameterError(f"temperature must be positive and finite, got {T!r}")


def thermal_weights(spectrum: HamiltonianSpectrum, T: float) -> np.ndarray:
    """Boltzmann populations of the energy eigenstates (sum to one)."""
    _check_temperature(T)
    shifted = spectrum.energies - spectrum.energies[0]
    w = np.exp(-shifted / T)
    return w / w.sum()


def log_partition_function(spectrum: HamiltonianSpectrum, T: float) -> float:
    """``ln Z`` with ``Z = sum_n exp(-E_n / T)``; evaluated without overflow."""
    _check_temperature(T)
    e0 = spectrum.energies[0]
    return float(-e0 / T + np.log(np.sum(np.exp(-(spectrum.energies - e0) / T))))


def thermal_state(spectrum: HamiltonianSpectrum, T: float) -> np.ndarray:
    w = thermal_weights(spectrum, T)
    U = spectrum.vectors
    rho = (U * w) @ U.conj().T
    return (0.5 * (rho + rho.conj().T)).astype(complex)


def thermal_energy(spectrum: HamiltonianSpectrum, T: float) -> float:
    """Canonical energy ``Tr(rho_T H)``."""
    return float(thermal_weights(spectrum, T) @ spectrum.energies)


def effective_temperature(spectrum: HamiltonianSpectrum, energy: float, rtol: float = 1e-10) -> float:
    """Temperature whose canonical energy equals ``energy``.

    ``Tr(rho_T H)`` increases strictly from ``E_min`` (T -> 0) to the spectral
    mean (T -> inf), so the root is unique.  Bisection runs on ``ln T``.

    Raises
    ------
    OutOfSpectrumError
        ``energy <= E_min``.
    NegativeTemperatureError
        ``energy >= mean(E)``; no positive temperature reaches it.
    """
    e_min = float(spectrum.energies[0])
    e_mean = spectrum.mean_energy
    if energy <= e_min:
        raise OutOfSpectrumError(f"energy {energy} is at or below the ground state {e_min}")
    if energy >= e_mean:
        raise NegativeTemperatureError(
            f"energy {energy} is at or above the infinite-temperature mean {e_mean}"
        )
    scale = max(spectrum.bandwidth, 1e-300)
    lo = hi = math.log(scale)
    while thermal_energy(spectrum, math.exp(lo)) >= energy:
        lo -= 2.0
        if lo < -700:
            raise OutOfSpectrumError(f"energy {energy} is indistinguishable from E_min")
    while thermal_energy(spectrum, math.exp(hi)) <= energy:
        hi += 2.0
        if hi > 700:
            raise NegativeTemperatureError(f"energy {energy} is indistinguishable from the mean")
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if thermal_energy(spectrum, math.exp(mid)) < energy:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def frobenius_distance(rho, sigma) -> float:
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ContractError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return float(np.linalg.norm(rho - sigma))


def validate_density(
    rho,
    herm_tol: float = HERM_TOL,
    trace_tol: float = TRACE_TOL,
    min_eig_tol: float = POSITIVITY_TOL,
) -> DensityReport:
    """Hermiticity defect (max abs entry of ``rho - rho^dag``), trace defect and
    smallest eigenvalue of the Hermitian part."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    trace = float(abs(np.trace(rho) - 1.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return DensityReport(herm, trace, min_eig, herm_tol, trace_tol, min_eig_tol)


@dataclass(frozen=True)
class StateSpec:
    """Descriptor of an initial state.

    ``kind`` is one of ``eigenstate`` (1-based energy index), ``thermal``
    (temperature), ``mixed`` (no value) or ``site`` (1-based site index).
    """

    kind: str
    value: float | int | None = None

    KINDS = ("eigenstate", "thermal", "mixed", "site")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown state kind {self.kind!r}; expected one of {self.KINDS}")
        if self.kind in ("eigenstate", "site"):
            if self.value is None or int(self.value) != self.value or self.value < 1:
                raise ParameterError(f"{self.kind} index must be a positive integer, got {self.value!r}")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "thermal":
            _check_temperature(self.value)
            object.__setattr__(self, "value", float(self.value))
        elif self.value is not None:
            raise ParameterError("the maximally mixed state takes no value")

    @property
    def label(self) -> str:
        if self.kind == "eigenstate":
            return f"m{self.value}"
        if self.kind == "thermal":
            return f"T{self.value:g}"
        if self.kind == "site":
            return f"site{self.value}"
        return "mixed"

    def check_bounds(self, L: int):
        if self.kind in ("eigenstate", "site") and self.value > L:
            raise ParameterError(f"{self.kind} index {self.value} outside 1..{L}")

    def density(self, spectrum: HamiltonianSpectrum) -> np.ndarray:
        L = spectrum.L
        self.check_bounds(L)
        if self.kind == "eigenstate":
            return pure_state_density(spectrum.state(self.value))
        if self.kind == "thermal":
            return thermal_state(spectrum, self.value)
        if self.kind == "site":
            v = np.zeros(L)
            v[self.value - 1] = 1.0
            return pure_state_density(v)
        return maximally_mixed(L)

    def __str__(self):
        if self.kind == "mixed":
            return "mixed"
        return f"{self.kind}:{self.value!r}"
