"""TOML run configuration and problem construction from named presets.

Layout (every section but ``domain`` is optional)::

    task = "solve"          # validate | norms | properties | solve | coercivity-scan
    seed = 0
    threads = 1

    [domain]                # lower, upper, cells, dilation (default 2.0), mask
    [exponents]             # preset = constant | sinusoidal | affine, plus parameters
    [kirchhoff]             # preset = constant | power | affine | full | tabulated
    [potential]             # preset = zero | constant | periodic
    [sources.a], [sources.b]   # preset = zero | constant | indicator | sine, or values = [...]
    [quadrature]            # QuadratureOptions fields
    [solver]                # MinimizerConfig fields
    [properties]            # trials
    [scan]                  # scales, direction = "tent" | "random"
    [norms]                 # fields (number of random fields reported)
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exponents import exponent_preset
from .grid import DiscreteField, DomainSpec
from .minimizer import MinimizerConfig
from .problem import (EnergyProblem, SourceSpec, kirchhoff_preset, potential_preset,
                      source_preset)
from .quadrature import QuadratureOptions

TASKS = ("validate", "norms", "properties", "solve", "coercivity-scan")


class ConfigError(ValueError):
    """The configuration file cannot be parsed or is inconsistent."""


@dataclass
class RunConfig:
    problem: dict
    task: str = "validate"
    seed: int = 0
    threads: int = 1
    out: str = "out"
    solver: dict = field(default_factory=dict)
    properties: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if "domain" not in self.problem:
            raise ConfigError("missing [domain] section")

    def minimizer_config(self) -> MinimizerConfig:
        known = {f.name for f in dc_fields(MinimizerConfig)}
        extra = set(self.solver) - known
        if extra:
            raise ConfigError(f"unknown solver keys {sorted(extra)}")
        opts = dict(self.solver)
        opts.setdefault("seed", self.seed)
        return MinimizerConfig(**opts)


_PROBLEM_KEYS = ("domain", "exponents", "kirchhoff", "potential", "sources", "quadrature")


def parse_config(text: str, overrides=None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    problem = {k: raw[k] for k in _PROBLEM_KEYS if k in raw}
    known = set(_PROBLEM_KEYS) | {"task", "seed", "threads", "out", "solver", "properties", "scan", "norms"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    top = {k: raw[k] for k in ("task", "seed", "threads", "out") if k in raw}
    top.update(overrides)
    return RunConfig(problem, solver=raw.get("solver", {}), properties=raw.get("properties", {}),
                     scan=raw.get("scan", {}), norms=raw.get("norms", {}), **top)


def load_config(path, overrides=None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, overrides)


def _preset(section, default, builder):
    section = dict(section or {})
    name = section.pop("preset", default)
    try:
        return builder(name, **section)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    except TypeError as exc:
        raise ConfigError(f"bad parameters for preset {name!r}: {exc}") from exc


def build_domain(sec) -> DomainSpec:
    try:
        return DomainSpec(tuple(sec["lower"]), tuple(sec["upper"]), tuple(sec["cells"]),
                          sec.get("dilation", 2.0), None if "mask" not in sec else tuple(sec["mask"]))
    except KeyError as exc:
        raise ConfigError(f"[domain] needs {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"[domain]: {exc}") from exc


def _source(sec, dom):
    sec = dict(sec or {})
    if "values" in sec:
        return DiscreteField(dom, list(map(float, sec["values"])), extended_by_zero=False)
    return _preset(sec, "zero", source_preset)


def build_problem(cfg: RunConfig | dict, validate=True) -> EnergyProblem:
    """EnergyProblem from the problem sections; exponent checks raise PreconditionError."""
    sec = cfg.problem if isinstance(cfg, RunConfig) else cfg
    dom = build_domain(sec["domain"])
    fields = _preset(sec.get("exponents"), "constant", exponent_preset)
    kirch = _preset(sec.get("kirchhoff"), "constant", kirchhoff_preset)
    pot = _preset(sec.get("potential"), "zero", potential_preset)
    srcs = sec.get("sources", {})
    sources = SourceSpec(_source(srcs.get("a"), dom), _source(srcs.get("b"), dom))
    quad = None
    if "quadrature" in sec:
        base = QuadratureOptions.default(dom.dim)
        try:
            quad = QuadratureOptions(**{**vars(base), **sec["quadrature"]})
        except TypeError as exc:
            raise ConfigError(f"[quadrature]: {exc}") from exc
    return EnergyProblem(dom, fields, kirch, pot, sources, quad, validate=validate)
