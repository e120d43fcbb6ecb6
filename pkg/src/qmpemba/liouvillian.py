"""Dephasing Lindbladian for a single particle on a lattice.

Vectorization is column stacking, ``vec(A X B) = (B^T kron A) vec(X)``, so a
density matrix ``rho`` maps to ``rho.ravel(order="F")``.  Left modes are paired
with right modes through the Hilbert-Schmidt product ``Tr(l^dag r)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from ._kernels import rk4_tridiagonal
from .errors import ContractError, DegeneracyError, NumericalError, ParameterError

__all__ = [
    "DEFAULT_L_CAP",
    "DissipationSpec",
    "DephasingGenerator",
    "LiouvillianSpectrum",
    "SlowestModes",
    "GapWarning",
    "vec",
    "unvec",
    "apply_liouvillian",
    "apply_adjoint",
    "build_liouvillian",
    "spectral_decomposition",
    "slowest_mode",
]

DEFAULT_L_CAP = 60
ZERO_TOL = 1e-9
PIVOT_TOL = 1e-12
GAP_TOL = 1e-12


@dataclass(frozen=True)
class DissipationSpec:
    """Uniform on-site dephasing, jump operators ``O_j = n_j``, one channel per site."""

    gamma: float = 1.0
    channels: int = 1
    family: str = "dephasing"

    def __post_init__(self):
        if not isinstance(self.gamma, (int, float, np.floating, np.integer)) or not math.isfinite(self.gamma):
            raise ParameterError(f"gamma must be a finite real number, got {self.gamma!r}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.channels != 1:
            raise ParameterError(f"only one dissipation channel per site is supported, got {self.channels}")
        if self.family != "dephasing":
            raise ParameterError(f"unsupported jump-operator family {self.family!r}")


def vec(rho) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = math.isqrt(v.size)
    return v.reshape(d, d, order="F")


def _check_hamiltonian(H):
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractError(f"Hamiltonian must be square, got shape {H.shape}")
    return H


class DephasingGenerator:
    """Matrix-free action of the Lindbladian and its adjoint.

    Works on a single ``(L, L)`` matrix or a stack ``(..., L, L)``.  A
    tridiagonal Hamiltonian is applied through its bands, which keeps the
    cost at ``O(L^2)`` per matrix.
    """

    def __init__(self, H, dissipation: DissipationSpec):
        H = _check_hamiltonian(H)
        self.H = H
        self.L = H.shape[0]
        self.gamma = dissipation.gamma
        self.tridiagonal = np.count_nonzero(np.triu(H, 2)) == 0 and np.count_nonzero(np.tril(H, -2)) == 0
        eps = np.diag(H).astype(complex)
        self._real_diag = bool(np.all(eps.imag == 0))
        # -i(eps_i - eps_j) - gamma on off-diagonals
        decay = np.full((self.L, self.L), self.gamma)
        np.fill_diagonal(decay, 0.0)
        self._phase = -1j * (eps[:, None] - eps[None, :]) - decay
        self._phase_adj = 1j * (eps[:, None] - eps[None, :]).conj() - decay
        if self.tridiagonal:
            self._up = np.diag(H, 1)[:, None]  # H[i, i+1]
            self._down = np.diag(H, -1)[:, None]  # H[i+1, i]
        else:
            self._Hoff = (H - np.diag(np.diag(H))).astype(complex)

    def _offdiag_commutator(self, rho):
        """``[H_off, rho]`` for the off-diagonal part of ``H``."""
        if not self.tridiagonal:
            return self._Hoff @ rho - rho @ self._Hoff
        out = np.zeros_like(rho)
        up, down = self._up, self._down
        out[..., :-1, :] += up * rho[..., 1:, :]
        out[..., 1:, :] += down * rho[..., :-1, :]
        out[..., :, :-1] -= rho[..., :, 1:] * down.T
        out[..., :, 1:] -= rho[..., :, :-1] * up.T
        return out

    def propagate(self, rho, h: float, nsteps: int, adjoint: bool = False):
        """``nsteps`` classical RK4 steps of size ``h`` (stack or single matrix)."""
        rho = np.asarray(rho, dtype=complex)
        single = rho.ndim == 2
        y = rho[None] if single else rho.reshape(-1, self.L, self.L)
        if self.tridiagonal and self._real_diag:
            eps = np.ascontiguousarray(np.diag(self.H).real).astype(complex)
            up = np.ascontiguousarray(self._up[:, 0]).astype(complex)
            down = np.ascontiguousarray(self._down[:, 0]).astype(complex)
            sgn = 1j if adjoint else -1j
            y = rk4_tridiagonal(np.ascontiguousarray(y), eps, up, down, self.gamma, sgn, float(h), int(nsteps))
        else:
            fn = self.adjoint if adjoint else self
            y = _rk4(fn, y, h, nsteps)
        return y[0] if single else y.reshape(rho.shape)

    def __call__(self, rho):
        rho = np.asarray(rho)
        if rho.shape[-2:] != (self.L, self.L):
            raise ContractError(f"density matrix shape {rho.shape} does not match L={self.L}")
        return self._phase * rho - 1j * self._offdiag_commutator(rho)

    def adjoint(self, X):
        X = np.asarray(X)
        if X.shape[-2:] != (self.L, self.L):
            raise ContractError(f"matrix shape {X.shape} does not match L={self.L}")
        return self._phase_adj * X + 1j * self._offdiag_commutator(X)


def _rk4(fn, y, h, nsteps):
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(nsteps):
        k1 = fn(y)
        k2 = fn(y + half * k1)
        k3 = fn(y + half * k2)
        k4 = fn(y + h * k3)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
    return y


def apply_liouvillian(H, dissipation: DissipationSpec, rho) -> np.ndarray:
    """``d rho / dt = -i[H, rho] + gamma (diag(rho) - rho)``."""
    return DephasingGenerator(H, dissipation)(rho)


def apply_adjoint(H, dissipation: DissipationSpec, X) -> np.ndarray:
    """Heisenberg-picture generator ``i[H, X] + gamma (diag(X) - X)``."""
    return DephasingGenerator(H, dissipation).adjoint(X)


def build_liouvillian(H, dissipation: DissipationSpec, l_cap: int = DEFAULT_L_CAP) -> np.ndarray:
    """Dense ``L^2 x L^2`` superoperator in the column-stacking convention."""
    H = _check_hamiltonian(H)
    L = H.shape[0]
    if L > l_cap:
        raise ParameterError(f"dense Liouvillian refused for L={L} > cap {l_cap}; use the matrix-free path")
    eye = np.eye(L)
    Lmat = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    # sum_j n_j (x) n_j - (I (x) n_j + n_j (x) I) / 2  ==  diag(vec(I)) - 1
    Lmat += dissipation.gamma * (np.diag(vec(eye)) - np.eye(L * L))
    return Lmat


@dataclass(frozen=True)
class LiouvillianSpectrum:
    """Full biorthonormal eigen-decomposition, sorted slowest first.

    ``right_vectors[:, n]`` and ``left_vectors[:, n]`` are vectorized modes with
    ``left_vectors.conj().T @ right_vectors == I``.  Mode 0 is the steady state
    ``I / L`` with left partner ``I``.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    pivots: np.ndarray

    @property
    def d(self) -> int:
        return math.isqrt(len(self.eigenvalues))

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def gap(self) -> float:
        return float(abs(self.eigenvalues[1].real))

    @cached_property
    def right_modes(self) -> np.ndarray:
        d = self.d
        return self.right_vectors.T.reshape(-1, d, d).transpose(0, 2, 1)

    @cached_property
    def left_modes(self) -> np.ndarray:
        d = self.d
        return self.left_vectors.T.reshape(-1, d, d).transpose(0, 2, 1)

    @property
    def steady_state(self) -> np.ndarray:
        return self.right_modes[0]

    def coefficients(self, rho0) -> np.ndarray:
        """Expansion coefficients ``c_n = Tr(l_n^dag rho0)``."""
        rho0 = np.asarray(rho0)
        if rho0.shape != (self.d, self.d):
            raise ContractError(f"rho0 shape {rho0.shape} does not match d={self.d}")
        return self.left_vectors.conj().T @ vec(rho0)

    def evolve(self, coefficients, times) -> np.ndarray:
        """States ``sum_n c_n r_n exp(lambda_n t)`` for each time, shape ``(nt, d, d)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        amps = coefficients[:, None] * np.exp(np.outer(self.eigenvalues, times))
        flat = self.right_vectors @ amps
        d = self.d
        return flat.T.reshape(-1, d, d).transpose(0, 2, 1)

    def reconstruct(self) -> np.ndarray:
        """``sum_n lambda_n vec(r_n) vec(l_n)^dag``; equals the input superoperator."""
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors.conj().T

    def biorthonormality_residual(self) -> float:
        G = self.left_vectors.conj().T @ self.right_vectors
        return float(np.max(np.abs(G - np.eye(self.size))))


def _sort_order(w: np.ndarray, first: int) -> np.ndarray:
    rest = np.array([k for k in range(len(w)) if k != first], dtype=int)
    wr = w[rest]
    keys = (
        wr.imag,
        np.abs(wr.real),
        np.round(-wr.imag, 12),
        np.round(np.abs(wr.real), 12),
    )
    return np.concatenate([[first], rest[np.lexsort(keys)]])


def spectral_decomposition(
    Lmat, zero_tol: float = ZERO_TOL, pivot_tol: float = PIVOT_TOL
) -> LiouvillianSpectrum:
    """Right/left eigenmodes of a dense Liouvillian.

    Right modes are scaled to unit Frobenius norm with their largest entry
    real and positive; left modes are the rows of ``R^{-1}``, which makes the
    pair biorthonormal even inside degenerate eigenspaces.  The steady state
    is pinned to exactly ``I / L``.

    Raises
    ------
    DegeneracyError
        A mode's pivot ``1 / (|r_n| |l_n|)`` falls below ``pivot_tol``, i.e. the
        eigenvector basis is numerically defective.
    """
    Lmat = np.asarray(Lmat)
    n = Lmat.shape[0]
    d = math.isqrt(n)
    if Lmat.ndim != 2 or Lmat.shape[1] != n or d * d != n:
        raise ContractError(f"Liouvillian must be square with a square-number size, got {Lmat.shape}")
    try:
        w, R = scipy.linalg.eig(Lmat, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"non-Hermitian eigensolver failed: {exc}") from exc

    identity = vec(np.eye(d))
    zeros = np.flatnonzero(np.abs(w) <= zero_tol)
    if zeros.size == 0:
        raise NumericalError(f"no eigenvalue within {zero_tol} of zero; not a trace-preserving generator")
    weight = np.abs(identity @ R[:, zeros]) / np.linalg.norm(R[:, zeros], axis=0)
    k0 = int(zeros[np.argmax(weight)])

    R = R / np.linalg.norm(R, axis=0)
    pivots = np.argmax(np.abs(R), axis=0)
    phases = R[pivots, np.arange(n)]
    R = R * (np.abs(phases) / phases)
    w = w.copy()
    w[k0] = 0.0
    R[:, k0] = identity / d

    order = _sort_order(w, k0)
    w = w[order]
    R = R[:, order]
    try:
        Lft = np.linalg.inv(R).conj().T
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("eigenvector matrix is singular", indices=range(n)) from exc
    pivot = 1.0 / (np.linalg.norm(Lft, axis=0) * np.linalg.norm(R, axis=0))
    bad = np.flatnonzero(pivot < pivot_tol)
    if bad.size:
        raise DegeneracyError(
            f"defective eigenvalues at sorted indices {bad.tolist()} (pivot < {pivot_tol})", indices=bad
        )
    if zeros.size == 1:
        Lft[:, 0] = identity
    for arr in (w, R, Lft, pivot):
        arr.setflags(write=False)
    return LiouvillianSpectrum(w, R, Lft, pivot)


class GapWarning(UserWarning):
    """The spectrum has no dissipative gap (steady state not unique)."""


@dataclass(frozen=True)
class SlowestModes:
    """The slowest relaxing mode(s), with every mode tied at ``Re lambda_2``."""

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    indices: tuple = ()
    flagged: bool = False

    @property
    def gap(self) -> float:
        return float(abs(self.eigenvalues[0].real))

    @property
    def rate(self) -> float:
        """``Re lambda_2`` (non-positive)."""
        return float(self.eigenvalues[0].real)

    def coefficients(self, rho0) -> np.ndarray:
        rho0 = np.asarray(rho0)
        return np.einsum("kij,ij->k", self.left.conj(), rho0)

    def overlap(self, rho0) -> float:
        """Root-sum-square of ``|Tr(l^dag rho0)|`` over the tied set."""
        return float(np.sqrt(np.sum(np.abs(self.coefficients(rho0)) ** 2)))


def tied_indices(real_parts: np.ndarray, start: int, rel_tol: float = 1e-9) -> np.ndarray:
    ref = real_parts[start]
    tol = rel_tol * max(1.0, abs(ref))
    return np.flatnonzero(np.abs(real_parts - ref) <= tol)


def slowest_mode(spectrum: LiouvillianSpectrum, rel_tol: float = 1e-9) -> SlowestModes:
    """``lambda_2`` and its modes plus all modes sharing its real part.

    A gap below 1e-12 (e.g. ``gamma = 0``) is flagged and warned about rather
    than raised.
    """
    if spectrum.size < 2:
        raise ContractError("spectrum has no non-stationary modes")
    idx = tied_indices(spectrum.eigenvalues.real, 1, rel_tol)
    idx = idx[idx >= 1]
    flagged = abs(spectrum.eigenvalues[1].real) < GAP_TOL
    if flagged:
        warnings.warn("no dissipative gap: |Re lambda_2| < 1e-12", GapWarning, stacklevel=2)
    return SlowestModes(
        eigenvalues=spectrum.eigenvalues[idx],
        right=spectrum.right_modes[idx],
        left=spectrum.left_modes[idx],
        indices=tuple(int(i) for i in idx),
        flagged=bool(flagged),
    )
