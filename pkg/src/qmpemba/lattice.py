"""Quasiperiodic tight-binding chain: Hamiltonian, spectrum, IPR, mobility edge.

The on-site energy of site ``j = 1..L`` is ``V cos(beta * j**alpha)`` and
nearest neighbours are coupled by ``J`` with open boundaries.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NumericalError, ParameterError

__all__ = [
    "ModelParams",
    "HamiltonianSpectrum",
    "Phase",
    "MobilityEdge",
    "MobilityEdgeWarning",
    "onsite_energies",
    "build_hamiltonian",
    "diagonalize",
    "ipr",
    "mobility_edge",
    "classify_state",
]

NORM_TOL = 1e-10
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the quasiperiodic chain.

    Attributes
    ----------
    V : float
        Potential strength.
    J : float
        Hopping amplitude. ``J = 0`` is accepted (isolated sites).
    beta : float
        Modulation wavenumber.
    alpha : float
        Modulation exponent.
    L : int
        Number of sites.
    """

    V: float
    J: float
    beta: float
    alpha: float
    L: int

    def __post_init__(self):
        for name in ("V", "J", "beta", "alpha"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ParameterError(f"L must be an integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.L < 2:
            raise ParameterError(f"L must be >= 2, got {self.L}")
        if self.J < 0:
            raise ParameterError(f"J must be >= 0, got {self.J}")
        if self.V < 0:
            raise ParameterError(f"V must be >= 0, got {self.V}")

    def replace(self, **changes) -> "ModelParams":
        fields = dict(V=self.V, J=self.J, beta=self.beta, alpha=self.alpha, L=self.L)
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class HamiltonianSpectrum:
    """Ascending energies and the matching orthonormal eigenvectors (columns)."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def L(self) -> int:
        return len(self.energies)

    @property
    def bandwidth(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    @property
    def mean_energy(self) -> float:
        """Infinite-temperature energy ``Tr(H)/L``."""
        return float(np.mean(self.energies))

    def state(self, m: int) -> np.ndarray:
        """Eigenvector with 1-based energy index ``m``."""
        if not 1 <= m <= self.L:
            raise ContractError(f"eigenstate index m={m} outside 1..{self.L}")
        return self.vectors[:, m - 1]

    def energy(self, m: int) -> float:
        if not 1 <= m <= self.L:
            raise ContractError(f"eigenstate index m={m} outside 1..{self.L}")
        return float(self.energies[m - 1])


class Phase(enum.Enum):
    LOCALIZED = "localized"
    EXTENDED = "extended"
    BOUNDARY = "boundary"


class MobilityEdgeWarning(UserWarning):
    """Parameters lie outside the regime where ``E_c = ±(2J - V)`` is known to hold."""


@dataclass(frozen=True)
class MobilityEdge:
    energy: float
    in_regime: bool

    @property
    def edges(self) -> tuple[float, float]:
        return (-self.energy, self.energy)


def onsite_energies(params: ModelParams) -> np.ndarray:
    j = np.arange(1, params.L + 1, dtype=float)
    return params.V * np.cos(params.beta * j ** params.alpha)


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense real symmetric ``L x L`` Hamiltonian with open boundaries."""
    if not isinstance(params, ModelParams):
        raise ParameterError("build_hamiltonian expects a ModelParams instance")
    H = np.diag(onsite_energies(params))
    idx = np.arange(params.L - 1)
    H[idx, idx + 1] = params.J
    H[idx + 1, idx] = params.J
    return H


def diagonalize(H: np.ndarray) -> HamiltonianSpectrum:
    """Eigen-decompose a real symmetric Hamiltonian.

    Each eigenvector's largest-magnitude component is made positive so the
    output is reproducible across LAPACK builds.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractError(f"Hamiltonian must be square, got shape {H.shape}")
    if not np.allclose(H, H.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise ContractError("Hamiltonian is not Hermitian")
    try:
        energies, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return HamiltonianSpectrum(energies, vectors)


def ipr(state) -> float:
    """Inverse participation ratio ``sum_j |psi_j|**4`` of a normalized state."""
    state = np.asarray(state)
    if state.ndim != 1:
        raise ContractError(f"state must be a vector, got shape {state.shape}")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"state is not normalized (norm={norm!r})")
    return float(np.sum(np.abs(state) ** 4))


def mobility_edge(params: ModelParams) -> MobilityEdge:
    """``E_c = 2J - V``; warns when 0 < alpha < 1, V < 2J does not hold.

    Irrationality of ``beta`` cannot be decided in floating point and is not
    checked.
    """
    in_regime = 0.0 < params.alpha < 1.0 and params.V < 2.0 * params.J
    if not in_regime:
        warnings.warn(
            f"mobility-edge formula used outside 0<alpha<1, V<2J (alpha={params.alpha}, "
            f"V={params.V}, J={params.J})",
            MobilityEdgeWarning,
            stacklevel=2,
        )
    return MobilityEdge(2.0 * params.J - params.V, in_regime)


def classify_state(energy: float, params: ModelParams) -> Phase:
    edge = abs(mobility_edge(params).energy)
    delta = abs(energy) - edge
    if abs(delta) <= BOUNDARY_TOL:
        return Phase.BOUNDARY
    return Phase.LOCALIZED if delta > 0 else Phase.EXTENDED
