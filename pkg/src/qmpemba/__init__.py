"""Relaxation of a dephased particle in a quasiperiodic chain.

Builds the lattice Hamiltonian, the dephasing Lindbladian and its
biorthonormal spectrum, evolves density matrices with two independent
engines, and compares how fast different initial states approach the
maximally mixed steady state.
"""
from .config import ExperimentConfig, load_preset, parse_config, render_config
from .diagnostics import CrossingResult, OverlapReport, detect_crossing, mode_overlap, slowest_overlap
from .dynamics import (
    TimeGrid,
    Trajectory,
    asymptotic_rate,
    distance_trajectory,
    evolve_ode,
    evolve_ode_many,
    evolve_spectral,
    fit_log_tail,
    slowest_modes_iterative,
)
from .errors import (
    AccuracyError,
    CompletenessError,
    ConfigParseError,
    ConfigValidationError,
    ContractError,
    DegeneracyError,
    InsufficientDataError,
    NegativeTemperatureError,
    NumericalError,
    OutOfSpectrumError,
    ParameterError,
    QMpembaError,
)
from .experiment import run_experiment, scan
from .lattice import (
    HamiltonianSpectrum,
    ModelParams,
    Phase,
    build_hamiltonian,
    classify_state,
    diagonalize,
    ipr,
    mobility_edge,
)
from .liouvillian import (
    DissipationSpec,
    LiouvillianSpectrum,
    SlowestModes,
    apply_liouvillian,
    build_liouvillian,
    slowest_mode,
    spectral_decomposition,
)
from .report import MpembaReport, mpemba_report
from .states import (
    StateSpec,
    effective_temperature,
    frobenius_distance,
    maximally_mixed,
    pure_state_density,
    thermal_state,
    validate_density,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CompletenessError",
    "ConfigParseError",
    "ConfigValidationError",
    "ContractError",
    "CrossingResult",
    "DegeneracyError",
    "DissipationSpec",
    "ExperimentConfig",
    "HamiltonianSpectrum",
    "InsufficientDataError",
    "LiouvillianSpectrum",
    "ModelParams",
    "MpembaReport",
    "NegativeTemperatureError",
    "NumericalError",
    "OutOfSpectrumError",
    "OverlapReport",
    "ParameterError",
    "Phase",
    "QMpembaError",
    "SlowestModes",
    "StateSpec",
    "TimeGrid",
    "Trajectory",
    "apply_liouvillian",
    "asymptotic_rate",
    "build_hamiltonian",
    "build_liouvillian",
    "classify_state",
    "detect_crossing",
    "diagonalize",
    "distance_trajectory",
    "effective_temperature",
    "evolve_ode",
    "evolve_ode_many",
    "evolve_spectral",
    "fit_log_tail",
    "frobenius_distance",
    "ipr",
    "load_preset",
    "maximally_mixed",
    "mobility_edge",
    "mode_overlap",
    "mpemba_report",
    "parse_config",
    "pure_state_density",
    "render_config",
    "run_experiment",
    "scan",
    "slowest_mode",
    "slowest_modes_iterative",
    "slowest_overlap",
    "spectral_decomposition",
    "thermal_state",
    "validate_density",
]
