"""Time evolution: spectral reconstruction and fixed-step RK4 integration.

Also hosts the log-tail fit used to read off asymptotic relaxation rates and
the propagator-based subspace iteration that finds the slowest modes when
the dense Liouvillian is too large to build.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, ContractError, InsufficientDataError, NumericalError, ParameterError
from .liouvillian import (
    GAP_TOL,
    DephasingGenerator,
    DissipationSpec,
    GapWarning,
    LiouvillianSpectrum,
    SlowestModes,
    tied_indices,
)
from .states import maximally_mixed

__all__ = [
    "TimeGrid",
    "Trajectory",
    "TailFit",
    "default_step",
    "max_stable_step",
    "evolve_spectral",
    "evolve_ode",
    "evolve_ode_many",
    "distance_trajectory",
    "fit_log_tail",
    "asymptotic_rate",
    "slowest_modes_iterative",
]

TRACE_DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray
    spacing: str = "linear"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ParameterError("time grid must be a non-empty 1-d sequence")
        if t[0] != 0.0:
            raise ParameterError("time grid must start at t = 0")
        if not np.all(np.isfinite(t)):
            raise ParameterError("time grid must be finite")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("time grid must be strictly increasing")
        if self.spacing not in ("linear", "logarithmic"):
            raise ParameterError(f"unknown spacing policy {self.spacing!r}")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def linear(cls, t_max: float, samples: int) -> "TimeGrid":
        if samples < 2 or not t_max > 0:
            raise ParameterError("linear grid needs t_max > 0 and at least 2 samples")
        return cls(np.linspace(0.0, t_max, samples), "linear")

    @classmethod
    def logarithmic(cls, t_max: float, samples: int, t_min: float | None = None) -> "TimeGrid":
        if samples < 3 or not t_max > 0:
            raise ParameterError("logarithmic grid needs t_max > 0 and at least 3 samples")
        t_min = t_max * 1e-4 if t_min is None else t_min
        if not 0 < t_min < t_max:
            raise ParameterError("need 0 < t_min < t_max")
        return cls(np.concatenate([[0.0], np.geomspace(t_min, t_max, samples - 1)]), "logarithmic")

    def __len__(self):
        return len(self.times)


@dataclass
class Trajectory:
    """Sampled evolution of one initial state.

    ``distances`` is the Frobenius distance to ``target`` (the steady state
    ``I / L`` unless set otherwise).  The three defect series are the
    conservation diagnostics of every sample.
    """

    grid: TimeGrid
    distances: np.ndarray
    trace_defect: np.ndarray
    herm_defect: np.ndarray
    min_eig: np.ndarray
    engine: str
    states: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


def _diagnostics(states: np.ndarray):
    tr = np.abs(np.trace(states, axis1=-2, axis2=-1) - 1.0)
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, -1, -2))), axis=(-2, -1))
    hpart = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    min_eig = np.linalg.eigvalsh(hpart)[..., 0]
    return tr, herm, min_eig


def _distances(states: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.linalg.norm(states - target, axis=(-2, -1))


def _check_rho(rho0, L):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (L, L):
        raise ContractError(f"rho0 shape {rho0.shape} does not match dimension {L}")
    return rho0


def evolve_spectral(
    spectrum: LiouvillianSpectrum,
    rho0,
    grid: TimeGrid,
    target=None,
    keep_states: bool = True,
    chunk: int = 256,
) -> Trajectory:
    """``rho(t) = rho_ss + sum_{n>=2} c_n r_n exp(lambda_n t)``, ``c_n = Tr(l_n^dag rho0)``."""
    d = spectrum.d
    if spectrum.right_vectors.shape != (d * d, d * d) or spectrum.left_vectors.shape != (d * d, d * d):
        raise ContractError("spectral evolution needs the complete set of d^2 modes")
    rho0 = _check_rho(rho0, d)
    target = maximally_mixed(d) if target is None else np.asarray(target)
    c = spectrum.coefficients(rho0)
    times = grid.times
    n = len(times)
    D = np.empty(n)
    tr = np.empty(n)
    herm = np.empty(n)
    mine = np.empty(n)
    states = np.empty((n, d, d), dtype=complex) if keep_states else None
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        block = spectrum.evolve(c, times[sl])
        block = 0.5 * (block + np.conj(np.swapaxes(block, -1, -2)))
        D[sl] = _distances(block, target)
        tr[sl], herm[sl], mine[sl] = _diagnostics(block)
        if keep_states:
            states[sl] = block
    return Trajectory(grid, D, tr, herm, mine, "spectral", states, {"coefficients": c})


def default_step(H, dissipation: DissipationSpec) -> float:
    """``0.01 / max(gamma, 4 J)`` with ``J`` the largest hopping amplitude."""
    H = np.asarray(H)
    off = H - np.diag(np.diag(H))
    J = float(np.max(np.abs(off))) if off.size else 0.0
    scale = max(dissipation.gamma, 4.0 * J)
    return 0.01 / scale if scale > 0 else 0.01


def max_stable_step(H, dissipation: DissipationSpec) -> float:
    """Conservative bound ``0.1 * min(1 / gamma, 1 / |H|_2)``."""
    hnorm = float(np.linalg.norm(np.asarray(H), 2))
    inv = [1.0 / x for x in (dissipation.gamma, hnorm) if x > 0]
    return 0.1 * min(inv) if inv else math.inf


def _substeps(dt, step):
    n = max(1, math.ceil(dt / step - 1e-9))
    return dt / n, n


def evolve_ode_many(
    H,
    dissipation: DissipationSpec,
    rho0s,
    grid: TimeGrid,
    step: float | None = None,
    target=None,
    keep_states: bool = True,
    check_trace: bool = True,
) -> list[Trajectory]:
    """Integrate several initial states together with classical RK4.

    The integrator lands exactly on every sample time by shrinking the last
    step of each interval.  Trace is not renormalized; drift above 1e-8 at any
    sample raises :class:`AccuracyError`.
    """
    gen = DephasingGenerator(H, dissipation)
    L = gen.L
    rho = np.stack([_check_rho(r, L) for r in rho0s])
    limit = max_stable_step(H, dissipation)
    if step is None:
        step = min(default_step(H, dissipation), limit)
    if not step > 0:
        raise ParameterError(f"step must be positive, got {step}")
    if step > limit * (1 + 1e-12):
        raise ParameterError(f"step {step} exceeds the stability bound {limit:.6g}")
    target = maximally_mixed(L) if target is None else np.asarray(target)
    times = grid.times
    nt, k = len(times), rho.shape[0]
    samples = np.empty((nt, k, L, L), dtype=complex) if keep_states else None
    D = np.empty((nt, k))
    tr = np.empty((nt, k))
    herm = np.empty((nt, k))
    mine = np.empty((nt, k))
    for i, t in enumerate(times):
        if i > 0:
            h, n = _substeps(t - times[i - 1], step)
            rho = gen.propagate(rho, h, n)
        D[i] = _distances(rho, target)
        tr[i], herm[i], mine[i] = _diagnostics(rho)
        if check_trace and np.any(tr[i] > TRACE_DRIFT_TOL):
            raise AccuracyError(
                f"trace drift {tr[i].max():.3g} at t={t:.6g} exceeds {TRACE_DRIFT_TOL}; reduce the step"
            )
        if keep_states:
            samples[i] = rho
    out = []
    for j in range(k):
        out.append(
            Trajectory(
                grid,
                D[:, j].copy(),
                tr[:, j].copy(),
                herm[:, j].copy(),
                mine[:, j].copy(),
                "ode",
                samples[:, j].copy() if keep_states else None,
                {"step": step},
            )
        )
    return out


def evolve_ode(H, dissipation: DissipationSpec, rho0, grid: TimeGrid, step: float | None = None, **kwargs) -> Trajectory:
    return evolve_ode_many(H, dissipation, [rho0], grid, step, **kwargs)[0]


def distance_trajectory(traj: Trajectory, target=None) -> np.ndarray:
    """Frobenius distance series; the steady state ``I / L`` by default."""
    if target is None:
        return traj.distances
    if traj.states is None:
        raise ContractError("trajectory did not retain its states")
    return _distances(traj.states, np.asarray(target))


@dataclass(frozen=True)
class TailFit:
    rate: float
    intercept: float
    max_residual: float
    samples: int


def fit_log_tail(times, D, t_start: float | None = None, tail: float = 0.3, floor: float = 1e-12) -> TailFit:
    """Least-squares line through ``ln D`` on the tail of the series.

    The tail is ``t >= t_start`` when given, otherwise the last ``tail``
    fraction of the samples.  Samples at or below ``floor`` are dropped.
    """
    times = np.asarray(times, dtype=float)
    D = np.asarray(D, dtype=float)
    if times.shape != D.shape:
        raise ContractError("times and D must have the same shape")
    if t_start is None:
        if not 0 < tail <= 1:
            raise ParameterError("tail fraction must be in (0, 1]")
        mask = np.arange(len(D)) >= len(D) - max(1, int(round(tail * len(D))))
    else:
        mask = times >= t_start
    mask &= D > floor
    if np.count_nonzero(mask) < 4:
        raise InsufficientDataError(f"only {np.count_nonzero(mask)} usable tail samples; need at least 4")
    t, y = times[mask], np.log(D[mask])
    slope, intercept = np.polyfit(t, y, 1)
    resid = float(np.max(np.abs(y - (slope * t + intercept))))
    return TailFit(float(slope), float(intercept), resid, int(mask.sum()))


def asymptotic_rate(times, D, tail: float = 0.3, floor: float = 1e-12) -> float:
    """Slope of ``ln D(t)`` over the trailing fraction of the samples."""
    return fit_log_tail(times, D, tail=tail, floor=floor).rate


def _traceless(X):
    L = X.shape[-1]
    tr = np.trace(X, axis1=-2, axis2=-1) / L
    return X - tr[..., None, None] * np.eye(L)


def _orthonormalize(X):
    k, L, _ = X.shape
    q, _ = np.linalg.qr(X.reshape(k, L * L).T)
    return q.T.reshape(k, L, L)


def _subspace_iteration(apply, L, propagate, block, tol, max_iter, rng):
    X = rng.standard_normal((block, L, L)) + 1j * rng.standard_normal((block, L, L))
    X = _orthonormalize(_traceless(X))
    prev = None
    for it in range(1, max_iter + 1):
        X = _orthonormalize(_traceless(propagate(X)))
        AX = apply(X)
        flatX = X.reshape(block, -1)
        A = flatX.conj() @ AX.reshape(block, -1).T
        theta, Y = np.linalg.eig(A)
        order = np.lexsort((-theta.imag, np.abs(theta.real)))
        theta, Y = theta[order], Y[:, order]
        ritz = np.einsum("kj,kab->jab", Y, X)
        resid = np.linalg.norm(np.einsum("kj,kab->jab", Y, AX) - theta[:, None, None] * ritz, axis=(1, 2))
        resid /= np.linalg.norm(ritz, axis=(1, 2))
        lead = theta[0]
        if prev is not None and abs(lead - prev) <= tol * max(1.0, abs(lead)) and resid[0] <= math.sqrt(tol):
            return theta, ritz, resid, it
        prev = lead
    raise NumericalError(f"subspace iteration did not converge in {max_iter} iterations")


def _gauge(modes):
    modes = modes / np.linalg.norm(modes, axis=(1, 2))[:, None, None]
    flat = modes.reshape(len(modes), -1)
    piv = flat[np.arange(len(flat)), np.argmax(np.abs(flat), axis=1)]
    return modes * (np.abs(piv) / piv)[:, None, None]


def slowest_modes_iterative(
    H,
    dissipation: DissipationSpec,
    block: int = 6,
    interval: float = 100.0,
    step: float | None = None,
    tol: float = 1e-8,
    max_iter: int = 200,
    seed: int = 0,
    rel_tol: float = 1e-6,
) -> SlowestModes:
    """Slowest mode(s) without building the dense superoperator.

    Subspace iteration with the RK4 propagator over ``interval`` acts on the
    traceless sector, which deflates the steady state.  Ritz values come from
    the generator projected on the block and converge when the leading one
    changes by less than ``tol``.  Left modes come from the same procedure on
    the adjoint generator and are biorthonormalized against the right ones.
    """
    if dissipation.gamma < GAP_TOL:
        raise NumericalError("no dissipative gap at gamma = 0")
    gen = DephasingGenerator(H, dissipation)
    L = gen.L
    limit = max_stable_step(H, dissipation)
    h = min(step or limit, limit)
    h, n = _substeps(interval, h)
    rng = np.random.default_rng(seed)

    theta_r, right, res_r, _ = _subspace_iteration(
        gen, L, lambda X: gen.propagate(X, h, n), block, tol, max_iter, rng
    )
    theta_l, left, res_l, _ = _subspace_iteration(
        gen.adjoint, L, lambda X: gen.propagate(X, h, n, adjoint=True), block, tol, max_iter, rng
    )
    idx = tied_indices(theta_r.real, 0, rel_tol)
    idx = idx[idx < block - 1]
    lam = theta_r[idx]
    R = _gauge(right[idx])
    # pair each right mode with the left Ritz vector whose value is its conjugate
    pick = [int(np.argmin(np.abs(theta_l - np.conj(x)))) for x in lam]
    Lm = left[pick]
    G = np.einsum("kab,jab->kj", Lm.conj(), R)
    Lm = np.einsum("kj,kab->jab", np.linalg.inv(G).conj().T, Lm)
    flagged = abs(lam[0].real) < GAP_TOL
    if flagged:
        warnings.warn("no dissipative gap: |Re lambda_2| < 1e-12", GapWarning, stacklevel=2)
    return SlowestModes(lam, R, Lm, tuple(int(i) for i in idx), bool(flagged))
