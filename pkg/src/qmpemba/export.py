"""Plain-text artifact writers: CSV tables, mode dumps and JSON reports.

Floats are written with 17 significant digits so that re-reading them gives
back the same doubles.  Files are written to a temporary sibling and renamed
into place.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .lattice import HamiltonianSpectrum, ModelParams, classify_state, ipr

__all__ = [
    "fmt",
    "atomic_write",
    "spectrum_csv",
    "trajectory_csv",
    "ipr_csv",
    "matrix_csv",
    "modes_text",
    "read_modes_text",
    "read_csv_body",
    "json_text",
]

TRAJECTORY_COLUMNS = ("t", "D", "trace_defect", "herm_defect", "min_eig")


def fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _echo(echo: dict | None) -> list[str]:
    return [f"# {k} = {v}" for k, v in (echo or {}).items()]


def spectrum_csv(eigenvalues, echo: dict | None = None) -> str:
    lines = _echo(echo) + ["n,re,im"]
    lines += [f"{n},{fmt(lam.real)},{fmt(lam.imag)}" for n, lam in enumerate(eigenvalues, start=1)]
    return "\n".join(lines) + "\n"


def trajectory_csv(traj: Trajectory, echo: dict | None = None) -> str:
    lines = _echo(echo) + [",".join(TRAJECTORY_COLUMNS)]
    cols = (traj.times, traj.distances, traj.trace_defect, traj.herm_defect, traj.min_eig)
    for row in zip(*cols):
        lines.append(",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def ipr_csv(spectrum: HamiltonianSpectrum, params: ModelParams, echo: dict | None = None) -> str:
    lines = _echo(echo) + ["m,energy,ipr,phase"]
    for m in range(1, spectrum.L + 1):
        E = spectrum.energy(m)
        lines.append(f"{m},{fmt(E)},{fmt(ipr(spectrum.state(m)))},{classify_state(E, params).value}")
    return "\n".join(lines) + "\n"


def matrix_csv(matrix, echo: dict | None = None) -> str:
    """Real part of a matrix, one CSV row per matrix row."""
    matrix = np.real(np.asarray(matrix))
    lines = _echo(echo) + [",".join(fmt(x) for x in row) for row in matrix]
    return "\n".join(lines) + "\n"


def modes_text(eigenvalues, right, left=None) -> str:
    """Dump modes as text.

    Each mode is a header line ``# mode <n> <side> lambda=<re>,<im> shape=<d>x<d>``
    followed by one line holding the row-major entries as space-separated
    ``re,im`` pairs.
    """
    out = []
    for side, mats in (("right", right), ("left", left)):
        if mats is None:
            continue
        for n, (lam, M) in enumerate(zip(eigenvalues, mats), start=1):
            d = M.shape[0]
            out.append(f"# mode {n} {side} lambda={fmt(lam.real)},{fmt(lam.imag)} shape={d}x{d}")
            out.append(" ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in np.asarray(M).ravel()))
    return "\n".join(out) + "\n"


def read_modes_text(text: str) -> list[tuple[int, str, complex, np.ndarray]]:
    """Inverse of :func:`modes_text`."""
    lines = text.strip().splitlines()
    result = []
    for head, body in zip(lines[::2], lines[1::2]):
        _, _, n, side, lam, shape = head.split()
        re_, im_ = lam.split("=")[1].split(",")
        d = int(shape.split("=")[1].split("x")[0])
        vals = np.array([complex(float(a), float(b)) for a, b in (p.split(",") for p in body.split())])
        result.append((int(n), side, complex(float(re_), float(im_)), vals.reshape(d, d)))
    return result


def read_csv_body(path) -> tuple[list[str], np.ndarray]:
    """Column names and numeric rows of a CSV written here (comment lines skipped)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return header, np.array(rows)


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
