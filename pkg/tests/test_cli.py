import json
import os

import numpy as np
import pytest

from qmpemba.cli import main
from qmpemba.export import atomic_write, modes_text, read_csv_body, read_modes_text

SMALL = """\
[model]
V = 1.4
J = 1
beta = 4*pi**2
alpha = 0.7
L = 8

[states]
initial = m2, m6, T0.5

[grid]
samples = 120

[run]
engine = both
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_mpemba_artifacts(small_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["mpemba", "--config", str(small_config), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"config.ini", "spectrum.csv", "ipr.csv", "overlaps.json", "report.json"} <= names
    assert {"traj_m2_spectral.csv", "traj_m2_ode.csv", "traj_T0.5_ode.csv", "density_m2.csv"} <= names
    report = json.loads((out / "report.json").read_text())
    assert report["schema_version"] == "1.0"
    assert report["engine_discrepancy"] < 1e-8
    assert len(report["pairs"]) == 3
    header, rows = read_csv_body(out / "traj_m2_ode.csv")
    assert header == ["t", "D", "trace_defect", "herm_defect", "min_eig"]
    assert rows.shape == (120, 5)
    assert rows[0, 1] == pytest.approx(np.sqrt(1 - 1 / 8), abs=1e-12)
    echo = (out / "traj_m2_ode.csv").read_text().splitlines()
    assert "# L = 8" in echo and "# engine = ode" in echo
    assert not [p for p in out.iterdir() if p.name.endswith(".tmp")]
    assert str(out / "report.json") in capsys.readouterr().out


def test_outputs_are_deterministic(small_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evolve", "--config", str(small_config), "--out", str(a)]) == 0
    assert main(["evolve", "--config", str(small_config), "--out", str(b)]) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes(), p.name


def test_overrides_echoed(small_config, tmp_path):
    out = tmp_path / "o"
    assert main(["evolve", "--config", str(small_config), "--out", str(out), "--gamma", "0.5", "--engine", "ode"]) == 0
    assert not (out / "traj_m2_spectral.csv").exists()
    assert "# gamma = 0.5" in (out / "traj_m2_ode.csv").read_text()
    assert "gamma = 0.5" in (out / "config.ini").read_text()


def test_spectrum_modes_round_trip(small_config, tmp_path):
    out = tmp_path / "s"
    assert main(["spectrum", "--config", str(small_config), "--out", str(out), "--modes", "3"]) == 0
    modes = read_modes_text((out / "modes.txt").read_text())
    assert [(n, side) for n, side, _, _ in modes] == [(1, "right"), (2, "right"), (3, "right"), (1, "left"), (2, "left"), (3, "left")]
    np.testing.assert_allclose(modes[0][3], np.eye(8) / 8)
    _, rows = read_csv_body(out / "spectrum.csv")
    assert rows.shape == (64, 3)
    assert modes[1][2] == complex(rows[1, 1], rows[1, 2])


def test_modes_text_is_exact():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3))
    lam = np.array([0.1 - 0.2j, -1 / 3 + 1j / 7])
    back = read_modes_text(modes_text(lam, M))
    for (n, side, z, A), l0, M0 in zip(back, lam, M):
        assert side == "right" and z == l0
        np.testing.assert_array_equal(A, M0)


def test_atomic_write_leaves_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "x.csv"
    atomic_write(target, "old\n")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(target, "new\n")
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


@pytest.mark.filterwarnings("ignore::qmpemba.liouvillian.GapWarning")
def test_scan_with_gapless_point(small_config, tmp_path):
    out = tmp_path / "scan"
    rc = main(["scan", "--config", str(small_config), "--out", str(out), "--param", "gamma", "--values", "0,1"])
    assert rc == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert lines[0].startswith("parameter,value,gap,cross_m2_m6,t_cross_m2_m6,inverse_qme_m2_m6")
    assert lines[0].endswith("overlap_m2,overlap_m6,overlap_T0.5,error")
    assert len(lines) == 3
    assert "no dissipative gap" in lines[1]
    assert lines[2].split(",")[-1] == ""
    assert (out / "gamma=1" / "report.json").exists()


def test_workers_env_does_not_change_results(small_config, tmp_path, monkeypatch):
    monkeypatch.setenv("QMPEMBA_WORKERS", "1")
    assert main(["evolve", "--config", str(small_config), "--out", str(tmp_path / "w1")]) == 0
    monkeypatch.setenv("QMPEMBA_WORKERS", "4")
    assert main(["evolve", "--config", str(small_config), "--out", str(tmp_path / "w4")]) == 0
    for p in (tmp_path / "w1").iterdir():
        assert p.read_bytes() == (tmp_path / "w4" / p.name).read_bytes()


def test_preset_command(capsys):
    assert main(["preset", "--list"]) == 0
    assert capsys.readouterr().out.split() == ["fig1", "fig2", "fig3", "fig4"]
    assert main(["preset", "fig4"]) == 0
    assert "L = 100" in capsys.readouterr().out


@pytest.mark.parametrize(
    "text,code",
    [
        ("V = 1\n", 3),
        ("[model]\nV = 1\n", 4),
        (SMALL.replace("engine = both", "engine = warp"), 4),
        (SMALL.replace("m6", "m9"), 4),
    ],
)
def test_exit_codes_for_bad_configs(tmp_path, text, code, capsys):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    assert main(["evolve", "--config", str(path), "--out", str(tmp_path / "o")]) == code
    assert "error" in capsys.readouterr().err


def test_exit_code_usage_and_io(tmp_path, small_config):
    with pytest.raises(SystemExit) as info:
        main(["evolve", "--preset", "nope"])
    assert info.value.code == 2
    assert main(["evolve", "--config", str(tmp_path / "missing.ini")]) == 6
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["ipr", "--config", str(small_config), "--out", str(blocker / "sub")]) == 6
    assert main(["evolve"]) == 4


@pytest.mark.filterwarnings("ignore::qmpemba.liouvillian.GapWarning")
def test_numerical_failure_exit_code(small_config, tmp_path):
    # gamma = 0 has no gap, so no automatic time window
    assert main(["evolve", "--config", str(small_config), "--out", str(tmp_path / "n"), "--gamma", "0"]) == 5


def test_large_lattice_uses_matrix_free_path(tmp_path):
    text = SMALL.replace("L = 8", "L = 14").replace("engine = both", "engine = both\nl_cap = 10")
    path = tmp_path / "big.ini"
    path.write_text(text)
    out = tmp_path / "big"
    assert main(["mpemba", "--config", str(path), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["engine"] == "ode"
    assert "source = iterative" in (out / "spectrum.csv").read_text()
