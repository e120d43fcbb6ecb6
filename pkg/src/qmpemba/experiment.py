"""Experiment orchestration: artifacts for one configuration and parameter scans."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export
from .config import ExperimentConfig, ScanSpec, render_config
from .dynamics import slowest_modes_iterative
from .errors import QMpembaError
from .lattice import build_hamiltonian, diagonalize
from .liouvillian import DissipationSpec, build_liouvillian, spectral_decomposition
from .report import SCHEMA_VERSION, mpemba_report, worker_count

__all__ = ["COMMANDS", "ExperimentResult", "run_experiment", "scan", "scan_point_config"]

log = logging.getLogger(__name__)

COMMANDS = ("spectrum", "ipr", "evolve", "overlaps", "mpemba")


@dataclass
class ExperimentResult:
    status: int
    files: list = field(default_factory=list)
    report: object = None


def _echo(config: ExperimentConfig, **extra) -> dict:
    m = config.model
    echo = {
        "V": export.fmt(m.V),
        "J": export.fmt(m.J),
        "beta": export.fmt(m.beta),
        "alpha": export.fmt(m.alpha),
        "L": m.L,
        "gamma": export.fmt(config.dissipation.gamma),
    }
    echo.update(extra)
    return echo


def _spectrum_files(config, out: Path, export_modes: int) -> list[Path]:
    H = build_hamiltonian(config.model)
    files = []
    if config.model.L <= config.l_cap:
        spec = spectral_decomposition(build_liouvillian(H, config.dissipation, config.l_cap))
        eig = spec.eigenvalues
        source = "dense"
        right, left = spec.right_modes, spec.left_modes
    else:
        slow = slowest_modes_iterative(H, config.dissipation, step=config.step, seed=config.seed)
        eig = np.concatenate([[0.0], slow.eigenvalues])
        source = "iterative"
        ss = np.eye(config.model.L)[None]
        right = np.concatenate([ss / config.model.L, slow.right])
        left = np.concatenate([ss, slow.left])
    files.append(export.atomic_write(out / "spectrum.csv", export.spectrum_csv(eig, _echo(config, source=source))))
    if export_modes:
        k = min(export_modes, len(eig))
        text = export.modes_text(eig[:k], right[:k], left[:k])
        files.append(export.atomic_write(out / "modes.txt", text))
    return files


def _ipr_files(config, out: Path) -> list[Path]:
    hspec = diagonalize(build_hamiltonian(config.model))
    files = [export.atomic_write(out / "ipr.csv", export.ipr_csv(hspec, config.model, _echo(config)))]
    for s in config.states:
        if s.kind in ("eigenstate", "site"):
            rho = s.density(hspec)
            path = out / f"density_{s.label}.csv"
            files.append(export.atomic_write(path, export.matrix_csv(rho, _echo(config, state=str(s)))))
    return files


def _report_files(config, out: Path, command: str):
    report = mpemba_report(
        config.model,
        config.dissipation,
        config.states,
        engine=config.engine,
        samples=config.grid.samples,
        t_max=config.grid.t_max,
        spacing=config.grid.policy,
        step=config.step,
        l_cap=config.l_cap,
    )
    files = []
    if command in ("evolve", "mpemba"):
        for s in report.states:
            for engine, traj in s.trajectories.items():
                echo = _echo(config, state=str(s.spec), engine=engine, step=traj.metadata.get("step", "n/a"))
                path = out / f"traj_{s.label}_{engine}.csv"
                files.append(export.atomic_write(path, export.trajectory_csv(traj, echo)))
    if command in ("overlaps", "mpemba"):
        overlaps = {
            "schema_version": SCHEMA_VERSION,
            "slowest_eigenvalues": [[z.real, z.imag] for z in report.slowest.eigenvalues],
            "states": [s.overlap.to_dict() for s in report.states],
        }
        files.append(export.atomic_write(out / "overlaps.json", export.json_text(overlaps)))
    if command == "mpemba":
        doc = report.to_dict()
        doc["trajectory_files"] = [p.name for p in files if p.name.startswith("traj_")]
        files.append(export.atomic_write(out / "report.json", export.json_text(doc)))
    return files, report


def run_experiment(
    config: ExperimentConfig, out_dir=None, command: str = "mpemba", export_modes: int = 0
) -> ExperimentResult:
    """Write the artifacts of ``command`` for ``config`` into ``out_dir``.

    ``mpemba`` produces everything: spectrum, IPR table, trajectories,
    overlaps and the report.  A config carrying a ``[scan]`` section is
    delegated to :func:`scan`.  Errors propagate as exceptions; the CLI maps
    them to exit codes.
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    out = Path(out_dir or config.output or "out")
    out.mkdir(parents=True, exist_ok=True)
    if config.scan is not None and command == "mpemba":
        return scan(config, out)
    files = [export.atomic_write(out / "config.ini", render_config(config))]
    report = None
    if command in ("spectrum", "mpemba"):
        files += _spectrum_files(config, out, export_modes)
    if command in ("ipr", "mpemba"):
        files += _ipr_files(config, out)
    if command in ("evolve", "overlaps", "mpemba"):
        more, report = _report_files(config, out, command)
        files += more
    return ExperimentResult(0, files, report)


def scan_point_config(config: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    if parameter == "gamma":
        return config.with_overrides(dissipation=DissipationSpec(value), scan=None)
    kwargs = {parameter: value}
    cfg = config.with_overrides(model=config.model.replace(**kwargs), scan=None)
    if parameter == "L" and cfg.engine == "both" and cfg.model.L > cfg.l_cap:
        cfg = cfg.with_overrides(engine="ode")
    return cfg


def _scan_row(config: ExperimentConfig, parameter: str, value, out: Path | None) -> dict:
    row = {"parameter": parameter, "value": value, "gap": None, "error": ""}
    try:
        cfg = scan_point_config(config, parameter, value)
        if out is not None:
            sub = out / f"{parameter}={value:g}"
            result = run_experiment(cfg, sub, "mpemba")
            report = result.report
        else:
            report = mpemba_report(
                cfg.model, cfg.dissipation, cfg.states, engine=cfg.engine, samples=cfg.grid.samples,
                t_max=cfg.grid.t_max, spacing=cfg.grid.policy, step=cfg.step, l_cap=cfg.l_cap,
            )
        row["gap"] = report.slowest.gap
        row["report"] = report
    except (QMpembaError, ArithmeticError, ValueError) as exc:
        log.warning("scan point %s=%s failed: %s", parameter, value, exc)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _scan_csv(config: ExperimentConfig, rows: list[dict]) -> str:
    labels = [s.label for s in config.states]
    pairs = [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]]
    header = ["parameter", "value", "gap"]
    for a, b in pairs:
        header += [f"cross_{a}_{b}", f"t_cross_{a}_{b}", f"inverse_qme_{a}_{b}"]
    header += [f"overlap_{x}" for x in labels] + ["error"]
    lines = [",".join(header)]
    for row in rows:
        cells = [row["parameter"], export.fmt(row["value"]), "" if row["gap"] is None else export.fmt(row["gap"])]
        report = row.get("report")
        for a, b in pairs:
            if report is None:
                cells += ["", "", ""]
                continue
            p = report.pair(a, b)
            c = p.crossing
            cells += [str(c.exists).lower(), "" if c.t_cross is None else export.fmt(c.t_cross),
                      str(p.inverse_mpemba).lower()]
        for x in labels:
            cells.append("" if report is None else export.fmt(report.state(x).overlap.slowest_magnitude))
        cells.append(row["error"].replace(",", ";").replace("\n", " "))
        lines.append(",".join(str(c) for c in cells))
    return "\n".join(lines) + "\n"


def scan(config: ExperimentConfig, out_dir=None, spec: ScanSpec | None = None, write_points: bool = True) -> ExperimentResult:
    """Sweep one parameter; one ``scan.csv`` row per point.

    Failed points (for example ``gamma = 0``, which has no dissipative gap)
    keep their row with the error text and the sweep carries on.
    """
    spec = spec or config.scan
    if spec is None:
        raise ValueError("no sweep given")
    out = Path(out_dir or config.output or "out")
    out.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(lambda v: _scan_row(config, spec.parameter, v, out if write_points else None), spec.values))
    files = [
        export.atomic_write(out / "config.ini", render_config(config.with_overrides(scan=spec))),
        export.atomic_write(out / "scan.csv", _scan_csv(config, rows)),
    ]
    return ExperimentResult(0, files, rows)
