"""Experiment configuration: an INI-style text format and the bundled presets.

Example::

    [model]
    V = 1.4
    J = 1
    beta = 4*pi**2
    alpha = 0.7
    L = 35

    [dissipation]
    gamma = 1.0

    [states]
    initial = eigenstate:3, eigenstate:16, thermal:0.25

    [grid]
    policy = linear        # linear | logarithmic
    t_max = auto           # auto -> 12 / |Re lambda_2|
    samples = 600

    [run]
    engine = auto          # spectral | ode | both | auto (both for L <= 40)
    step = auto
    l_cap = 60
    seed = 0

    [scan]                 # optional
    parameter = V          # V | gamma | alpha | L
    values = 1.2, 1.4, 1.6

Numbers may be written as arithmetic on literals and ``pi``.
"""
from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, field

from .errors import ConfigParseError, ConfigValidationError, ParameterError
from .lattice import ModelParams
from .liouvillian import DEFAULT_L_CAP, DissipationSpec
from .states import StateSpec

__all__ = ["GridSpec", "ScanSpec", "ExperimentConfig", "PRESETS", "parse_config", "render_config", "load_preset"]

ENGINE_AUTO_MAX_L = 40
MAX_SCAN_POINTS = 100
SCAN_PARAMETERS = ("V", "gamma", "alpha", "L")

_SECTIONS = {
    "model": {"V", "J", "beta", "alpha", "L"},
    "dissipation": {"gamma"},
    "states": {"initial"},
    "grid": {"policy", "t_max", "samples"},
    "run": {"engine", "step", "l_cap", "seed", "output"},
    "scan": {"parameter", "values"},
}


@dataclass(frozen=True)
class GridSpec:
    policy: str = "linear"
    t_max: float | None = None
    samples: int = 600


@dataclass(frozen=True)
class ScanSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    dissipation: DissipationSpec = field(default_factory=DissipationSpec)
    states: tuple = ()
    grid: GridSpec = field(default_factory=GridSpec)
    engine: str = "both"
    step: float | None = None
    l_cap: int = DEFAULT_L_CAP
    seed: int = 0
    output: str | None = None
    scan: ScanSpec | None = None

    def with_overrides(self, **changes) -> "ExperimentConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**fields)


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _eval_number(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval_number(node.operand)
        return -value if isinstance(node.op, ast.USub) else value
    raise ValueError("unsupported expression")


def _number(text: str, name: str) -> float:
    try:
        value = _eval_number(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigValidationError(name, f"not a number: {text!r}") from exc
    value = float(value)
    if not math.isfinite(value):
        raise ConfigValidationError(name, f"not finite: {text!r}")
    return value


def _integer(text: str, name: str) -> int:
    value = _number(text, name)
    if value != int(value):
        raise ConfigValidationError(name, f"not an integer: {text!r}")
    return int(value)


def _optional(text: str, name: str, conv):
    return None if text.strip().lower() == "auto" else conv(text, name)


_SHORT_LABEL = re.compile(r"(m|T|site)([0-9.eE+-]+)")
_SHORT_KINDS = {"m": "eigenstate", "T": "thermal", "site": "site"}


def _state(text: str) -> StateSpec:
    text = text.strip()
    kind, _, value = text.partition(":")
    kind = kind.strip()
    short = _SHORT_LABEL.fullmatch(text)
    if short and not value:
        kind = _SHORT_KINDS[short.group(1)]
        value = short.group(2)
    try:
        if kind == "mixed" and not value:
            return StateSpec("mixed")
        if kind in ("eigenstate", "site"):
            return StateSpec(kind, _integer(value, "states.initial"))
        if kind == "thermal":
            return StateSpec(kind, _number(value, "states.initial"))
    except ParameterError as exc:
        raise ConfigValidationError("states.initial", str(exc)) from exc
    raise ConfigValidationError("states.initial", f"cannot read state descriptor {text!r}")


def _split_list(text: str) -> list[str]:
    return [item for item in (x.strip() for x in text.replace("\n", ",").split(",")) if item]


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigParseError
        Malformed syntax; carries the offending line number.
    ConfigValidationError
        Unknown section or key, missing model parameters or an invalid value.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"), strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError("expected a [section] header", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigParseError(f"cannot parse {line!r}", lineno) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(str(exc).split(":")[-1].strip(), exc.lineno) from exc
    except configparser.Error as exc:
        raise ConfigParseError(str(exc)) from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigValidationError(section, "unknown section")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigValidationError(f"{section}.{key}", "unknown key")

    if not parser.has_section("model"):
        raise ConfigValidationError("model", "model parameters are mandatory")
    m = parser["model"]
    missing = sorted(_SECTIONS["model"] - set(m))
    if missing:
        raise ConfigValidationError(f"model.{missing[0]}", "missing")
    try:
        model = ModelParams(
            V=_number(m["V"], "model.V"),
            J=_number(m["J"], "model.J"),
            beta=_number(m["beta"], "model.beta"),
            alpha=_number(m["alpha"], "model.alpha"),
            L=_integer(m["L"], "model.L"),
        )
    except ParameterError as exc:
        raise ConfigValidationError("model", str(exc)) from exc

    gamma = 1.0
    if parser.has_option("dissipation", "gamma"):
        gamma = _number(parser["dissipation"]["gamma"], "dissipation.gamma")
    try:
        dissipation = DissipationSpec(gamma)
    except ParameterError as exc:
        raise ConfigValidationError("dissipation.gamma", str(exc)) from exc

    states = ()
    if parser.has_option("states", "initial"):
        states = tuple(_state(s) for s in _split_list(parser["states"]["initial"]))
    for s in states:
        if s.kind in ("eigenstate", "site") and s.value > model.L:
            raise ConfigValidationError("states.initial", f"{s} outside 1..{model.L}")

    g = parser["grid"] if parser.has_section("grid") else {}
    policy = g.get("policy", "linear").strip()
    if policy not in ("linear", "logarithmic"):
        raise ConfigValidationError("grid.policy", f"unknown policy {policy!r}")
    t_max = _optional(g.get("t_max", "auto"), "grid.t_max", _number)
    if t_max is not None and t_max <= 0:
        raise ConfigValidationError("grid.t_max", "must be positive")
    samples = _integer(g.get("samples", "600"), "grid.samples")
    if samples < 3:
        raise ConfigValidationError("grid.samples", "need at least 3 samples")
    grid = GridSpec(policy, t_max, samples)

    r = parser["run"] if parser.has_section("run") else {}
    engine = r.get("engine", "auto").strip()
    if engine == "auto":
        engine = "both" if model.L <= ENGINE_AUTO_MAX_L else "ode"
    if engine not in ("spectral", "ode", "both"):
        raise ConfigValidationError("run.engine", f"unknown engine {engine!r}")
    step = _optional(r.get("step", "auto"), "run.step", _number)
    if step is not None and step <= 0:
        raise ConfigValidationError("run.step", "must be positive")
    l_cap = _integer(r.get("l_cap", str(DEFAULT_L_CAP)), "run.l_cap")
    if l_cap < 2:
        raise ConfigValidationError("run.l_cap", "must be >= 2")
    seed = _integer(r.get("seed", "0"), "run.seed")
    output = r.get("output")
    output = output.strip() if output else None

    scan = None
    if parser.has_section("scan"):
        s = parser["scan"]
        param = s.get("parameter", "").strip()
        if param not in SCAN_PARAMETERS:
            raise ConfigValidationError("scan.parameter", f"must be one of {SCAN_PARAMETERS}")
        conv = _integer if param == "L" else _number
        values = tuple(conv(v, "scan.values") for v in _split_list(s.get("values", "")))
        if not values:
            raise ConfigValidationError("scan.values", "empty sweep")
        if len(values) > MAX_SCAN_POINTS:
            raise ConfigValidationError("scan.values", f"at most {MAX_SCAN_POINTS} points")
        scan = ScanSpec(param, values)

    return ExperimentConfig(model, dissipation, states, grid, engine, step, l_cap, seed, output, scan)


def _fmt(x) -> str:
    return "auto" if x is None else repr(x)


def render_config(config: ExperimentConfig) -> str:
    """Text that :func:`parse_config` maps back to an equal config."""
    m = config.model
    lines = [
        "[model]",
        f"V = {m.V!r}",
        f"J = {m.J!r}",
        f"beta = {m.beta!r}",
        f"alpha = {m.alpha!r}",
        f"L = {m.L}",
        "",
        "[dissipation]",
        f"gamma = {config.dissipation.gamma!r}",
        "",
    ]
    if config.states:
        lines += ["[states]", "initial = " + ", ".join(str(s) for s in config.states), ""]
    g = config.grid
    lines += ["[grid]", f"policy = {g.policy}", f"t_max = {_fmt(g.t_max)}", f"samples = {g.samples}", ""]
    lines += [
        "[run]",
        f"engine = {config.engine}",
        f"step = {_fmt(config.step)}",
        f"l_cap = {config.l_cap}",
        f"seed = {config.seed}",
    ]
    if config.output:
        lines.append(f"output = {config.output}")
    lines.append("")
    if config.scan:
        lines += [
            "[scan]",
            f"parameter = {config.scan.parameter}",
            "values = " + ", ".join(repr(v) for v in config.scan.values),
            "",
        ]
    return "\n".join(lines)


_FIG_MODEL = """\
[model]
V = 1.4
J = 1
beta = 4*pi**2
alpha = 0.7
L = {L}

[dissipation]
# not given in the source figures; chosen default
gamma = 1.0
"""

PRESETS = {
    "fig1": _FIG_MODEL.format(L=35)
    + """
# IPR spectrum and the site density matrices of the m=3 and m=16 eigenstates
[states]
initial = eigenstate:3, eigenstate:16

[run]
engine = spectral
""",
    "fig2": _FIG_MODEL.format(L=35)
    + """
# localized (m=3) and extended (m=16) eigenstates against a T=0.25 thermal state
[states]
initial = eigenstate:3, eigenstate:16, thermal:0.25

# t_max and sampling are not given in the source figures: 12/|Re lambda_2|, 600 points
[grid]
policy = linear
t_max = auto
samples = 600

[run]
engine = auto
""",
    "fig3": _FIG_MODEL.format(L=35)
    + """
[states]
initial = eigenstate:3, eigenstate:16, thermal:0.3

[grid]
t_max = auto
samples = 600

[run]
engine = spectral

[scan]
parameter = V
values = 1.2, 1.4, 1.6
""",
    "fig4": _FIG_MODEL.format(L=100)
    + """
# L=100 is above the dense cap: ODE engine plus iterative slowest modes
[states]
initial = eigenstate:7, eigenstate:47, thermal:0.3

[grid]
t_max = auto
samples = 600

[run]
engine = ode
# stability bound 0.1/|H| is about 0.035 here; 0.03 keeps the run to minutes
step = 0.03
""",
}


def load_preset(name: str) -> ExperimentConfig:
    try:
        text = PRESETS[name]
    except KeyError:
        raise ConfigValidationError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return parse_config(text)
