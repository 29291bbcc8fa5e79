"""Experiment configuration files.

Flat key-value text with section headers (configparser syntax). Every key is
validated against the schema below; unknown keys are hard errors naming the
offending key. See ``docs/config.md`` for the documented schema.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .errors import ConfigError
from .experiments import StudyConfig
from .functions import TestFunction, parse_function
from .processes import (
    BrownianMotion,
    DeterministicGaussian,
    FixedStart,
    ProcessSpec,
    StochVol,
    UniformShift,
)

_SCHEMA = {
    "process": {"kind", "dimension", "x0", "shift_half_width",
                "sigma0", "eta", "drift_const", "diffusion_const"},
    "function": {"descriptor"},
    "study": {"kind", "n_list", "refine", "paths", "seed", "estimators",
              "horizon", "t_eval", "u_list"},
    "norms": {"s", "norm"},
    "simulate": {"n", "refine", "paths", "seed", "horizon"},
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Parsed and validated configuration plus its normalized text form."""

    sections: dict            # section -> {key: raw string}
    text: str                 # canonical text after overrides

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigError(f"missing required key [{section}] {key}")
        return value


def _validate(parser: configparser.ConfigParser):
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                allowed = ", ".join(sorted(_SCHEMA[section]))
                raise ConfigError(
                    f"unknown key {key!r} in section [{section}]; "
                    f"allowed keys: {allowed}")


def _apply_overrides(parser: configparser.ConfigParser, overrides):
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form "
                              "section.key=value")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError(f"override key {target!r} must be section.key")
        section, key = target.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"override names unknown key [{section}] {key}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][key] = value


def _canonical_text(parser: configparser.ConfigParser) -> str:
    out = io.StringIO()
    for section in sorted(parser.sections()):
        out.write(f"[{section}]\n")
        for key in sorted(parser[section]):
            out.write(f"{key} = {parser[section][key]}\n")
    return out.getvalue()


def load_config(text: str, overrides=()) -> ResolvedConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    _apply_overrides(parser, overrides)
    _validate(parser)
    sections = {s: dict(parser[s]) for s in parser.sections()}
    return ResolvedConfig(sections, _canonical_text(parser))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for p in text.split(","):
        p = p.strip()
        if p:
            v = float(p)
            if v != int(v):
                raise ConfigError(f"expected an integer, got {p!r}")
            out.append(int(v))
    return tuple(out)


def build_process(cfg: ResolvedConfig) -> ProcessSpec:
    kind = cfg.get("process", "kind", "brownian").strip().lower()
    d = int(cfg.get("process", "dimension", "1"))
    x0 = _floats(cfg.get("process", "x0", ",".join(["0.0"] * d)))
    if len(x0) != d:
        raise ConfigError(f"x0 has {len(x0)} coordinates for dimension {d}")
    initial = FixedStart(x0)
    shift = None
    half = cfg.get("process", "shift_half_width")
    if half is not None:
        shift = UniformShift(float(half))

    if kind == "brownian":
        return BrownianMotion(dimension=d, initial=initial, shift=shift)
    if kind == "stochvol":
        return StochVol(sigma0=float(cfg.get("process", "sigma0", "1.0")),
                        eta=float(cfg.get("process", "eta", "0.5")),
                        initial=initial, shift=shift)
    if kind == "deterministic_gaussian":
        import numpy as np
        b = _floats(cfg.get("process", "drift_const", ",".join(["0.0"] * d)))
        s = _floats(cfg.get("process", "diffusion_const", ",".join(["1.0"] * d)))
        if len(b) != d or len(s) != d:
            raise ConfigError("drift_const / diffusion_const must have one "
                              "entry per dimension")
        bv = np.asarray(b)
        sm = np.diag(s)
        return DeterministicGaussian(
            dimension=d,
            drift=lambda t: bv,
            diffusion=lambda t: sm,
            initial=initial, shift=shift,
            drift_integral=lambda t0, t1: bv * (t1 - t0),
            covariance_integral=lambda t0, t1: sm @ sm.T * (t1 - t0),
            nondegenerate=all(v != 0 for v in s))
    raise ConfigError(f"unknown process kind {kind!r}; "
                      "choose brownian, deterministic_gaussian or stochvol")


def build_function(cfg: ResolvedConfig) -> TestFunction:
    return parse_function(cfg.require("function", "descriptor"))


def build_study(cfg: ResolvedConfig, kind: str, seed_override: int | None = None,
                threads: int = 1) -> StudyConfig:
    spec = build_process(cfg)
    function = build_function(cfg)
    n_list = _ints(cfg.require("study", "n_list"))
    seed = seed_override if seed_override is not None \
        else int(cfg.require("study", "seed"))
    t_eval = cfg.get("study", "t_eval")
    estimators = tuple(
        p.strip() for p in cfg.get("study", "estimators",
                                   "riemann,trapezoid").split(",") if p.strip())
    return StudyConfig(
        spec=spec,
        function=function,
        n_list=n_list,
        refine=int(cfg.get("study", "refine", "64")),
        paths=int(cfg.require("study", "paths")),
        master_seed=seed,
        kind=kind,
        estimators=estimators,
        t_eval=None if t_eval is None else float(t_eval),
        horizon=float(cfg.get("study", "horizon", "1.0")),
        threads=threads,
        u_list=_floats(cfg.get("study", "u_list", "1,3,10")),
    )
