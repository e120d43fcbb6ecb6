"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 config parse error, 4 validation
error, 5 numerical failure, 6 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PRESETS, ScanSpec, load_preset, parse_config
from .errors import (
    ConfigParseError,
    ConfigValidationError,
    ContractError,
    NumericalError,
    ParameterError,
)
from .experiment import run_experiment, scan

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_NUMERICAL = 5
EXIT_IO = 6

log = logging.getLogger("qmpemba")


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigParseError):
        return EXIT_PARSE
    if isinstance(exc, (ConfigValidationError, ParameterError, ContractError)):
        return EXIT_VALIDATION
    if isinstance(exc, (NumericalError, ArithmeticError)):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def _add_common(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="configuration file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="bundled configuration")
    p.add_argument("--out", type=Path, help="output directory (default: config output or ./out)")
    p.add_argument("--gamma", type=float, help="override the dephasing rate")
    p.add_argument("--engine", choices=("spectral", "ode", "both"), help="override the evolution engine")
    p.add_argument("--l-cap", type=int, dest="l_cap", help="largest L for the dense Liouvillian")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmpemba", description="Dephasing relaxation in a quasiperiodic chain.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "Liouvillian spectrum CSV",
        "ipr": "Hamiltonian spectrum with IPR and phase labels, plus site density matrices",
        "evolve": "distance trajectories of every initial state",
        "overlaps": "slowest-mode overlaps (JSON)",
        "mpemba": "all artifacts plus the comparative report",
        "scan": "sweep one parameter and aggregate crossings and overlaps",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "spectrum":
            p.add_argument("--modes", type=int, default=0, metavar="K", help="also dump the K slowest modes")
        if name == "scan":
            p.add_argument("--param", choices=("V", "gamma", "alpha", "L"))
            p.add_argument("--values", help="comma-separated sweep values")
    p = sub.add_parser("preset", help="print a bundled configuration")
    p.add_argument("name", nargs="?", choices=sorted(PRESETS))
    p.add_argument("--list", action="store_true", help="list preset names")
    return parser


def _load(args):
    if args.config is not None:
        text = args.config.read_text()
        config = parse_config(text)
    elif args.preset is not None:
        config = load_preset(args.preset)
    else:
        raise ConfigValidationError("config", "give --config PATH or --preset NAME")
    from .liouvillian import DissipationSpec

    overrides = {"engine": args.engine, "l_cap": args.l_cap}
    if args.gamma is not None:
        overrides["dissipation"] = DissipationSpec(args.gamma)
    return config.with_overrides(**overrides)


def _run(args) -> int:
    if args.command == "preset":
        if args.list or args.name is None:
            print("\n".join(sorted(PRESETS)))
        else:
            sys.stdout.write(PRESETS[args.name])
        return EXIT_OK
    config = _load(args)
    if args.command == "scan":
        spec = config.scan
        if args.param:
            if not args.values:
                raise ConfigValidationError("values", "--param needs --values")
            conv = int if args.param == "L" else float
            try:
                values = tuple(conv(v) for v in args.values.split(","))
            except ValueError as exc:
                raise ConfigValidationError("values", str(exc)) from exc
            spec = ScanSpec(args.param, values)
        if spec is None:
            raise ConfigValidationError("scan", "no sweep: give --param/--values or a [scan] section")
        result = scan(config, args.out, spec)
    else:
        result = run_experiment(config, args.out, args.command, getattr(args, "modes", 0))
    for path in result.files:
        print(path)
    return result.status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes below
        code = exit_code(exc)
        print(f"qmpemba: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
