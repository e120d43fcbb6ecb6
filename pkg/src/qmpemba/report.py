"""Comparative relaxation report for a set of initial states."""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    CrossingResult,
    OverlapReport,
    detect_crossing,
    inverse_mpemba,
    mode_overlap,
    slowest_overlap,
)
from .dynamics import (
    TimeGrid,
    Trajectory,
    asymptotic_rate,
    evolve_ode_many,
    evolve_spectral,
    slowest_modes_iterative,
)
from .errors import InsufficientDataError, NumericalError, ParameterError
from .lattice import HamiltonianSpectrum, ModelParams, build_hamiltonian, diagonalize
from .liouvillian import (
    DEFAULT_L_CAP,
    DissipationSpec,
    LiouvillianSpectrum,
    SlowestModes,
    build_liouvillian,
    slowest_mode,
    spectral_decomposition,
)
from .states import StateSpec, effective_temperature, maximally_mixed

__all__ = ["SCHEMA_VERSION", "StateResult", "PairResult", "MpembaReport", "mpemba_report", "worker_count"]

SCHEMA_VERSION = "1.0"
WORKERS_ENV = "QMPEMBA_WORKERS"
ENGINES = ("spectral", "ode", "both")
TMAX_PER_GAP = 12.0
DEFAULT_SAMPLES = 600


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class StateResult:
    spec: StateSpec
    energy: float
    temperature: float | None
    distance0: float
    overlap: OverlapReport
    rate: float | None
    trajectories: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.spec.label

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "descriptor": str(self.spec),
            "energy": self.energy,
            "effective_temperature": self.temperature,
            "initial_distance": self.distance0,
            "slowest_overlap": self.overlap.slowest_magnitude,
            "fitted_rate": self.rate,
        }


@dataclass
class PairResult:
    colder: str
    hotter: str
    crossing: CrossingResult
    ordered_by_temperature: bool

    @property
    def inverse_mpemba(self) -> bool:
        return self.ordered_by_temperature and inverse_mpemba(self.crossing)

    def to_dict(self) -> dict:
        return {
            "colder": self.colder,
            "hotter": self.hotter,
            "ordered_by_temperature": self.ordered_by_temperature,
            "crossing": self.crossing.to_dict(),
            "inverse_mpemba": self.inverse_mpemba,
        }


@dataclass
class MpembaReport:
    params: ModelParams
    dissipation: DissipationSpec
    engine: str
    grid: TimeGrid
    slowest: SlowestModes
    states: list
    pairs: list
    engine_discrepancy: float | None = None
    spectrum: LiouvillianSpectrum | None = None
    hamiltonian_spectrum: HamiltonianSpectrum | None = None

    def state(self, label: str) -> StateResult:
        for s in self.states:
            if s.label == label:
                return s
        raise KeyError(label)

    def pair(self, a: str, b: str) -> PairResult:
        for p in self.pairs:
            if {p.colder, p.hotter} == {a, b}:
                return p
        raise KeyError((a, b))

    def to_dict(self) -> dict:
        p = self.params
        return {
            "schema_version": SCHEMA_VERSION,
            "model": {"V": p.V, "J": p.J, "beta": p.beta, "alpha": p.alpha, "L": p.L},
            "dissipation": {"gamma": self.dissipation.gamma, "family": self.dissipation.family},
            "engine": self.engine,
            "grid": {"t_max": float(self.grid.times[-1]), "samples": len(self.grid), "spacing": self.grid.spacing},
            "slowest_modes": {
                "eigenvalues": [[lam.real, lam.imag] for lam in self.slowest.eigenvalues],
                "gap": self.slowest.gap,
                "flagged": self.slowest.flagged,
            },
            "engine_discrepancy": self.engine_discrepancy,
            "states": [s.to_dict() for s in self.states],
            "pairs": [q.to_dict() for q in self.pairs],
            "verdicts": [
                f"inverse QME: {q.colder} overtakes {q.hotter}" for q in self.pairs if q.inverse_mpemba
            ],
        }


def _temperature(spec: StateSpec, energy: float, hspec: HamiltonianSpectrum) -> float | None:
    if spec.kind == "thermal":
        return spec.value
    if spec.kind == "mixed":
        return None
    try:
        return effective_temperature(hspec, energy)
    except ParameterError:
        return None


def _default_grid(slowest: SlowestModes, samples: int, t_max: float | None, spacing: str) -> TimeGrid:
    if t_max is None:
        if slowest.flagged or slowest.gap == 0:
            raise NumericalError("no dissipative gap; give t_max explicitly")
        t_max = TMAX_PER_GAP / slowest.gap
    if spacing == "logarithmic":
        return TimeGrid.logarithmic(t_max, samples)
    return TimeGrid.linear(t_max, samples)


def mpemba_report(
    params: ModelParams,
    dissipation: DissipationSpec,
    states,
    engine: str = "spectral",
    grid: TimeGrid | None = None,
    samples: int = DEFAULT_SAMPLES,
    t_max: float | None = None,
    spacing: str = "linear",
    step: float | None = None,
    l_cap: int = DEFAULT_L_CAP,
    tail: float = 0.3,
    keep_states: bool = False,
    workers: int | None = None,
) -> MpembaReport:
    """Run every initial state and compare their relaxation.

    Above ``l_cap`` sites the dense Liouvillian is skipped: slowest modes come
    from subspace iteration and trajectories from the ODE engine only.
    Every pair of states is checked for a crossing of ``D(t)``, oriented
    colder-first when both temperatures are known; an inverse Mpemba verdict
    needs the colder curve to finish below the hotter one.
    """
    if engine not in ENGINES:
        raise ParameterError(f"engine must be one of {ENGINES}, got {engine!r}")
    states = [s if isinstance(s, StateSpec) else StateSpec(*s) for s in states]
    for s in states:
        s.check_bounds(params.L)
    workers = worker_count() if workers is None else workers

    H = build_hamiltonian(params)
    hspec = diagonalize(H)
    dense = params.L <= l_cap
    spectrum = None
    if dense:
        spectrum = spectral_decomposition(build_liouvillian(H, dissipation, l_cap))
        slowest = slowest_mode(spectrum)
    else:
        if engine != "ode":
            engine = "ode"
        slowest = slowest_modes_iterative(H, dissipation, step=step)
    if grid is None:
        grid = _default_grid(slowest, samples, t_max, spacing)

    rhos = [s.density(hspec) for s in states]
    trajs: dict[str, dict[str, Trajectory]] = {s.label: {} for s in states}
    if engine in ("spectral", "both"):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda r: evolve_spectral(spectrum, r, grid, keep_states=keep_states), rhos))
        for s, tr in zip(states, runs):
            trajs[s.label]["spectral"] = tr
    if engine in ("ode", "both"):
        runs = evolve_ode_many(H, dissipation, rhos, grid, step=step, keep_states=keep_states)
        for s, tr in zip(states, runs):
            trajs[s.label]["ode"] = tr
    discrepancy = None
    if engine == "both":
        discrepancy = max(
            float(np.max(np.abs(t["spectral"].distances - t["ode"].distances))) for t in trajs.values()
        )
    primary = "spectral" if engine in ("spectral", "both") else "ode"

    results = []
    for s, rho in zip(states, rhos):
        energy = float(np.real(np.trace(rho @ H)))
        overlap = mode_overlap(spectrum, rho, s.label) if dense else slowest_overlap(slowest, rho, s.label)
        D = trajs[s.label][primary].distances
        try:
            rate = asymptotic_rate(grid.times, D, tail=tail)
        except InsufficientDataError:
            rate = None
        results.append(StateResult(s, energy, _temperature(s, energy, hspec), float(D[0]), overlap, rate, trajs[s.label]))

    coeffs = {s.label: spectrum.coefficients(r) for s, r in zip(states, rhos)} if spectrum is not None else {}

    def difference(a, b):
        if primary != "spectral":
            return None
        ss = maximally_mixed(params.L)

        def f(t):
            ra = spectrum.evolve(coeffs[a], [t])[0]
            rb = spectrum.evolve(coeffs[b], [t])[0]
            return float(np.linalg.norm(ra - ss) - np.linalg.norm(rb - ss))

        return f

    def temp_key(r):
        return math.inf if r.spec.kind == "mixed" else r.temperature

    pairs = []
    for a, b in itertools.combinations(results, 2):
        ka, kb = temp_key(a), temp_key(b)
        ordered = ka is not None and kb is not None and ka != kb
        if ordered and ka > kb:
            a, b = b, a
        Da = trajs[a.label][primary].distances
        Db = trajs[b.label][primary].distances
        crossing = detect_crossing(Da, Db, grid.times, difference(a.label, b.label))
        pairs.append(PairResult(a.label, b.label, crossing, ordered))

    return MpembaReport(
        params, dissipation, engine, grid, slowest, results, pairs, discrepancy, spectrum, hspec
    )
