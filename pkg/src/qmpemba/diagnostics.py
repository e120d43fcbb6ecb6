"""Slowest-mode overlaps and D(t) crossing detection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CompletenessError, ContractError, InsufficientDataError
from .liouvillian import LiouvillianSpectrum, SlowestModes, tied_indices

__all__ = [
    "OverlapReport",
    "CrossingResult",
    "mode_overlap",
    "slowest_overlap",
    "detect_crossing",
    "inverse_mpemba",
]

COMPLETENESS_TOL = 1e-6


@dataclass(frozen=True)
class OverlapReport:
    """Expansion of ``rho0`` on the Liouvillian modes.

    ``coefficients[n] = Tr(l_n^dag rho0)``; ``slowest_magnitude`` is the
    root-sum-square over every mode tied at ``Re lambda_2``.
    """

    label: str
    coefficients: np.ndarray | None
    slowest_indices: tuple
    slowest_coefficients: np.ndarray
    residual: float | None = None

    @property
    def slowest_magnitude(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.slowest_coefficients) ** 2)))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "slowest_indices": list(self.slowest_indices),
            "slowest_coefficients": [[c.real, c.imag] for c in self.slowest_coefficients],
            "slowest_magnitude": self.slowest_magnitude,
            "reconstruction_residual": self.residual,
        }


def mode_overlap(spectrum: LiouvillianSpectrum, rho0, label: str = "", rel_tol: float = 1e-9) -> OverlapReport:
    """All coefficients ``c_n`` plus the slowest-set magnitude.

    Raises :class:`CompletenessError` if ``rho_ss + sum_{n>=2} c_n r_n`` misses
    ``rho0`` by more than 1e-6 in Frobenius norm.
    """
    rho0 = np.asarray(rho0)
    c = spectrum.coefficients(rho0)
    rebuilt = spectrum.steady_state + np.tensordot(c[1:], spectrum.right_modes[1:], axes=1)
    residual = float(np.linalg.norm(rebuilt - rho0))
    if residual > COMPLETENESS_TOL:
        raise CompletenessError(f"mode expansion misses rho0 by {residual:.3g}")
    idx = tied_indices(spectrum.eigenvalues.real, 1, rel_tol)
    idx = idx[idx >= 1]
    return OverlapReport(label, c, tuple(int(i) for i in idx), c[idx], residual)


def slowest_overlap(modes: SlowestModes, rho0, label: str = "") -> OverlapReport:
    """Overlap with an iteratively computed slowest set (no completeness check)."""
    return OverlapReport(label, None, modes.indices, modes.coefficients(rho0), None)


@dataclass(frozen=True)
class CrossingResult:
    """Sign changes of ``Da - Db`` at ``t > 0``.

    ``sign_before``/``sign_after`` refer to the first crossing; every
    crossing time is listed in ``times``.
    """

    exists: bool
    t_cross: float | None = None
    times: tuple = ()
    sign_before: int = 0
    sign_after: int = 0
    final_sign: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "exists": self.exists,
            "t_cross": self.t_cross,
            "all_crossings": list(self.times),
            "sign_before": self.sign_before,
            "sign_after": self.sign_after,
            "final_sign": self.final_sign,
            "note": self.note,
        }


def _bisect(f, a, b, fa, xtol):
    while b - a > xtol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def detect_crossing(
    Da,
    Db,
    times,
    difference: Callable[[float], float] | None = None,
    atol: float = 1e-12,
    xtol: float = 1e-6,
) -> CrossingResult:
    """Find where two distance curves cross.

    The ``t = 0`` sample is ignored, since pure states all start at the same
    distance.  Differences below ``atol`` count as zero and carry no sign.
    Each bracketing interval is refined by bisection on ``difference(t)``
    (re-evaluated dynamics) when provided, otherwise by linear interpolation.
    """
    Da = np.asarray(Da, dtype=float)
    Db = np.asarray(Db, dtype=float)
    times = np.asarray(times, dtype=float)
    if not (Da.shape == Db.shape == times.shape):
        raise ContractError("series and grid must have equal length")
    if len(times) < 3:
        raise InsufficientDataError("crossing detection needs at least 3 samples")
    diff = Da - Db
    keep = np.flatnonzero((times > 0) & (np.abs(diff) > atol))
    if keep.size == 0:
        return CrossingResult(False, note="series coincide at t > 0")
    signs = np.sign(diff[keep]).astype(int)
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    if flips.size == 0:
        s0 = int(signs[0])
        return CrossingResult(False, sign_before=s0, sign_after=s0, final_sign=s0)
    found = []
    for f in flips:
        i, j = keep[f], keep[f + 1]
        t0, t1 = times[i], times[j]
        if difference is not None:
            tc = _bisect(difference, t0, t1, difference(t0), xtol)
        else:
            tc = t0 + (t1 - t0) * diff[i] / (diff[i] - diff[j])
        found.append(float(tc))
    first = flips[0]
    return CrossingResult(
        True, found[0], tuple(found), int(signs[first]), int(signs[first + 1]), int(signs[-1])
    )


def inverse_mpemba(crossing: CrossingResult) -> bool:
    """True when the colder curve crosses the hotter one and ends up below it.

    ``crossing`` must come from ``detect_crossing(D_cold, D_hot, ...)``.
    """
    return crossing.exists and crossing.final_sign < 0
