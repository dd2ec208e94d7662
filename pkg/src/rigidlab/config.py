"""Experiment configuration: TOML text -> typed dataclasses.

Layout::

    [experiment]
    kind = "Ladder"          # one of KINDS
    replicas = 1
    master_seed = 0
    output_dir = "out"
    emit = ["csv", "json"]   # subset of csv, json, svg

    [ladder]                 # section named after the kind, see SECTIONS
    measure = "bergman"
    J = 64

Every key is checked against the dataclass for its section; unknown keys are
errors (with a suggestion when one is close), and each message names the line.
"""

import dataclasses
import difflib
import re
import sys
from dataclasses import dataclass, field
from typing import List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .export import config_hash
from .testfunctions import KINDS as FUNCTION_KINDS

MEASURES = ("ginibre", "bergman", "gaussian_power", "disk_uniform", "tabulated")
EMITS = ("csv", "json", "svg")


@dataclass
class ExperimentSection:
    kind: str = ""
    replicas: int = 1
    master_seed: int = 0
    output_dir: str = "out"
    emit: List[str] = field(default_factory=lambda: ["csv", "json"])


@dataclass
class MeasureFields:
    measure: str = "ginibre"
    a: float = 0.0
    b: float = 1.0
    c: float = 2.0
    radius: float = 1.0
    x: Optional[List[float]] = None
    w: Optional[List[float]] = None


@dataclass
class LadderConfig(MeasureFields):
    J: int = 64


@dataclass
class ClassifyConfig(MeasureFields):
    J: int = 64
    abs_continuous: bool = True
    strict: bool = False


@dataclass
class SampleGafConfig:
    alphas: List[float] = field(default_factory=lambda: [0.5])
    R: float = 3.0


@dataclass
class SampleDppConfig(MeasureFields):
    n: int = 32
    mode: str = "full"


@dataclass
class SampleLatticeConfig:
    beta: float = 0.5
    M: int = 50
    symmetric: bool = True


@dataclass
class VarianceSweepConfig(MeasureFields):
    process: str = "lattice"
    alpha: float = 0.5
    beta: float = 0.25
    n: int = 64
    function: str = "LatticeBump"
    r0: float = 1.0
    eps: float = 0.5
    k: int = 0
    Ls: List[float] = field(default_factory=lambda: [8.0, 16.0, 32.0, 64.0, 128.0])
    bound: bool = False


@dataclass
class PalmSweepConfig(MeasureFields):
    ns: List[int] = field(default_factory=lambda: [8, 16, 32, 64])


@dataclass
class KakutaniSweepConfig:
    beta: float = 1.0
    K_max: int = 10_000
    checkpoints: Optional[List[int]] = None


@dataclass
class RecoverConfig(MeasureFields):
    process: str = "dpp"
    n: int = 256
    alpha: float = 0.5
    r0: float = 2.0
    k_max: int = 0
    epsilon: float = 1.0
    L: float = 2.0
    function: str = "MollifiedLog"
    delta: Optional[float] = None
    predict: bool = False


@dataclass
class AppendixConfig:
    half_window: int = 3


@dataclass
class MixtureConfig(MeasureFields):
    n: int = 1
    base_diag: Optional[List[float]] = None
    f: List[float] = field(default_factory=lambda: [0.0, 1.0])


SECTIONS = {
    "Ladder": ("ladder", LadderConfig),
    "Classify": ("classify", ClassifyConfig),
    "SampleGaf": ("sample_gaf", SampleGafConfig),
    "SampleDpp": ("sample_dpp", SampleDppConfig),
    "SampleLattice": ("sample_lattice", SampleLatticeConfig),
    "VarianceSweep": ("variance_sweep", VarianceSweepConfig),
    "PalmSweep": ("palm_sweep", PalmSweepConfig),
    "KakutaniSweep": ("kakutani_sweep", KakutaniSweepConfig),
    "Recover": ("recover", RecoverConfig),
    "AppendixDemos": ("appendix", AppendixConfig),
    "MixtureDemo": ("mixture", MixtureConfig),
}
KINDS = tuple(SECTIONS)

_pos = (lambda v: v > 0, "must be positive")
_nonneg = (lambda v: v >= 0, "must be nonnegative")
CHECKS = {
    "replicas": (lambda v: v >= 1, "must be at least 1"),
    "master_seed": (lambda v: 0 <= v < 2**64, "must be a 64-bit unsigned integer"),
    "emit": (lambda v: set(v) <= set(EMITS), f"entries must be among {', '.join(EMITS)}"),
    "measure": (lambda v: v in MEASURES, f"must be one of {', '.join(MEASURES)}"),
    "b": _pos, "c": _pos, "a": _nonneg, "radius": _pos,
    "J": (lambda v: v >= 1, "must be at least 1"),
    "n": _nonneg, "M": (lambda v: v >= 1, "must be at least 1"),
    "alphas": (lambda v: len(v) > 0 and all(a > 0 for a in v), "must be a nonempty list of positive numbers"),
    "alpha": _pos, "R": _pos, "beta": _nonneg, "r0": _pos, "eps": _pos, "epsilon": _pos, "L": _pos,
    "k": _nonneg, "k_max": _nonneg, "half_window": (lambda v: 1 <= v <= 6, "must be between 1 and 6"),
    "mode": (lambda v: v in ("full", "moduli"), "must be full or moduli"),
    "process": (lambda v: v in ("lattice", "gaf", "dpp"), "must be lattice, gaf or dpp"),
    "function": (lambda v: v in FUNCTION_KINDS, f"must be one of {', '.join(FUNCTION_KINDS)}"),
    "Ls": (lambda v: len(v) > 0 and all(x > 0 for x in v), "must be a nonempty list of positive numbers"),
    "ns": (lambda v: len(v) > 0 and all(x >= 0 for x in v), "must be a nonempty list of nonnegative integers"),
    "K_max": (lambda v: v >= 1, "must be at least 1"),
    "checkpoints": (lambda v: all(x >= 1 for x in v), "entries must be at least 1"),
    "delta": _pos,
}


@dataclass
class ExperimentConfig:
    experiment: ExperimentSection
    params: object
    text: str = ""

    @property
    def kind(self):
        return self.experiment.kind

    @property
    def hash(self):
        return config_hash(self.text)


def _line_index(text):
    """(section, key) -> 1-based line number for simple ``key = value`` TOML."""
    where, section = {}, ""
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]", s)
        if m:
            section = m.group(1)
            where.setdefault((section, None), i)
            continue
        m = re.match(r'^([A-Za-z0-9_"\'-]+)\s*=', s)
        if m:
            where.setdefault((section, m.group(1).strip("\"'")), i)
    return where


def _type_error(tp, value):
    """None if ``value`` fits the annotation ``tp``, else a short description of the expected type."""
    origin = getattr(tp, "__origin__", None)
    args = getattr(tp, "__args__", ())
    if origin is not None and type(None) in args:  # Optional[X]
        if value is None:
            return None
        return _type_error([a for a in args if a is not type(None)][0], value)
    if origin in (list, List):
        if not isinstance(value, list):
            return "a list"
        for v in value:
            err = _type_error(args[0], v)
            if err:
                return f"a list of {err}s"
        return None
    if tp is bool:
        return None if isinstance(value, bool) else "true or false"
    if tp is int:
        return None if isinstance(value, int) and not isinstance(value, bool) else "an integer"
    if tp is float:
        return None if isinstance(value, (int, float)) and not isinstance(value, bool) else "a number"
    if tp is str:
        return None if isinstance(value, str) else "a string"
    return None


def _build(cls, section, data, where, errors):
    fields_ = {f.name: f for f in dataclasses.fields(cls)}
    kw = {}
    for key, value in data.items():
        line = where.get((section, key), where.get((section, None), 0))
        loc = f"line {line}: [{section}] {key}"
        if key not in fields_:
            near = difflib.get_close_matches(key, list(fields_), n=1, cutoff=0.6)
            hint = f" (did you mean '{near[0]}'?)" if near else ""
            errors.append(f"{loc}: unknown key{hint}")
            continue
        tp = fields_[key].type
        err = _type_error(tp, value)
        if err:
            errors.append(f"{loc}: expected {err}, got {value!r}")
            continue
        if isinstance(value, int) and tp in (float, Optional[float]) and not isinstance(value, bool):
            value = float(value)
        if isinstance(value, list) and tp in (List[float], Optional[List[float]]):
            value = [float(v) for v in value]
        check = CHECKS.get(key)
        if check and value is not None and not check[0](value):
            errors.append(f"{loc}: {check[1]}, got {value!r}")
            continue
        kw[key] = value
    return cls(**kw)


def validate_config(text):
    """Parse and validate; returns ExperimentConfig or raises ConfigError with every problem found."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None
    where = _line_index(text)
    errors = []
    if "experiment" not in raw or not isinstance(raw["experiment"], dict):
        raise ConfigError(["missing [experiment] section"])
    exp = _build(ExperimentSection, "experiment", raw["experiment"], where, errors)
    if exp.kind not in SECTIONS:
        line = where.get(("experiment", "kind"), where.get(("experiment", None), 0))
        near = difflib.get_close_matches(str(exp.kind), KINDS, n=1)
        hint = f" (did you mean '{near[0]}'?)" if near else ""
        errors.append(f"line {line}: [experiment] kind: must be one of {', '.join(KINDS)}{hint}")
        raise ConfigError(errors)
    section, cls = SECTIONS[exp.kind]
    for name, value in raw.items():
        if name in ("experiment", section):
            continue
        line = where.get((name, None), 0)
        near = difflib.get_close_matches(name, ["experiment", section], n=1, cutoff=0.6)
        hint = f" (did you mean '{near[0]}'?)" if near else ""
        errors.append(f"line {line}: unknown section [{name}] for kind {exp.kind}{hint}")
    body = raw.get(section, {})
    if not isinstance(body, dict):
        errors.append(f"[{section}] must be a table")
        body = {}
    params = _build(cls, section, body, where, errors)
    if isinstance(params, MeasureFields) and params.measure == "tabulated":
        if not params.x or not params.w or len(params.x) != len(params.w) or len(params.x) < 2:
            errors.append(f"line {where.get((section, 'measure'), 0)}: [{section}] measure: "
                          "tabulated needs lists x and w of equal length >= 2")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(exp, params, text)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(fh.read())
