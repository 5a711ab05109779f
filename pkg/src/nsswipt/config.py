"""
INI config files for system and scenario definitions.

Keys are SystemConfig field names. Any section name is accepted for system
keys (``[system]``, ``[channel]`` are the documented ones) except ``[eh]``,
which holds the harvester constants, and ``[scenario]``/``[sweep]``, which
only scenario files use. Per-user values are comma separated; ``inf`` is a
valid Rician factor.

Example::

    [system]
    M = 16
    K_I = 2
    K_E = 2
    P_max = 2
    C_thre = 8
    sigma0_dBm = -84

    [channel]
    kappa_I = 0
    kappa_E = inf
    d_I = 50
    d_E = 5

    [eh]
    a = 150
    b = 0.024
    Ms = 0.024

    [scenario]
    name = my_sweep
    methods = alg1, alg2:dsw
    n_trials = 100
    metrics = total_rf_power, total_dc_power
    x_axis = P_max

    [sweep]
    P_max = 1, 2, 4
"""

from __future__ import annotations

import configparser
import math
from dataclasses import fields
from pathlib import Path

from .energy_harvest import EHParams
from .errors import ConfigurationError
from .system_model import SystemConfig, noise_power_from_dBm

_INT = {"M", "K_I", "K_E", "rng_seed", "r_I", "r_E", "K"}
_PER_USER = {"kappa_I", "kappa_E", "d_I", "d_E", "aod_I", "aod_E"}
_SYSTEM = {f.name for f in fields(SystemConfig)} - {"eh"}
_EH = {f.name for f in fields(EHParams)}


def _number(text: str, key: str):
    try:
        return int(text) if key in _INT else float(text)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {text!r}") from None


def _value(key: str, text: str):
    text = text.strip()
    if text.lower() == "none":
        return None
    if key in _PER_USER and "," in text:
        return tuple(_number(t.strip(), key) for t in text.split(","))
    return _number(text, key)


def _read(source) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys are case sensitive field names
    try:
        if isinstance(source, str) and source.lstrip().startswith(("[", "#", ";")):
            cp.read_string(source)
        elif Path(source).is_file():
            cp.read(source, encoding="utf-8")
        else:
            raise ConfigurationError(f"config file not found: {source}")
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    return cp


def system_from_parser(cp: configparser.ConfigParser) -> SystemConfig:
    kw, eh = {}, {}
    for section in cp.sections():
        if section in ("scenario", "sweep"):
            continue
        for key, text in cp.items(section):
            if section == "eh":
                if key not in _EH:
                    raise ConfigurationError(f"unknown [eh] key {key!r}")
                eh[key] = _number(text, key)
            elif key == "sigma0_dBm":
                kw["sigma0_sq"] = noise_power_from_dBm(_number(text, key))
            elif key in _SYSTEM:
                kw[key] = _value(key, text)
            else:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")
    try:
        if eh:
            kw["eh"] = EHParams(**eh)
        return SystemConfig(**kw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_system_config(source) -> SystemConfig:
    """Parse a config file path (or INI text) into a validated SystemConfig."""
    return system_from_parser(_read(source))


def dump_system_config(cfg: SystemConfig) -> str:
    """INI text that loads back to ``cfg``."""
    def fmt(v):
        if isinstance(v, (tuple, list)):
            return ", ".join(fmt(x) for x in v)
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        return "none" if v is None else repr(v)

    lines = ["[system]"]
    for f in fields(SystemConfig):
        if f.name != "eh":
            lines.append(f"{f.name} = {fmt(getattr(cfg, f.name))}")
    lines.append("")
    lines.append("[eh]")
    for f in fields(EHParams):
        lines.append(f"{f.name} = {fmt(getattr(cfg.eh, f.name))}")
    return "\n".join(lines) + "\n"


def load_scenario(source):
    """Scenario from a file with ``[scenario]``, ``[sweep]`` and system sections."""
    from .harness import MethodSpec, Scenario

    cp = _read(source)
    if not cp.has_section("scenario"):
        raise ConfigurationError("scenario file needs a [scenario] section")
    s = cp["scenario"]
    unknown = set(s.keys()) - {"name", "methods", "n_trials", "metrics", "seed",
                               "description", "x_axis"}
    if unknown:
        raise ConfigurationError(f"unknown [scenario] keys: {', '.join(sorted(unknown))}")
    methods = []
    for tok in s.get("methods", "alg1").split(","):
        m, _, wf = tok.strip().partition(":")
        methods.append(MethodSpec(m, wf or None))
    sweep = []
    if cp.has_section("sweep"):
        for key, text in cp.items("sweep"):
            vals = tuple(_number(t.strip(), key) for t in text.split(","))
            sweep.append((key, vals))
    try:
        kw = dict(name=s.get("name", Path(str(source)).stem), base=system_from_parser(cp),
                  sweep=tuple(sweep), methods=tuple(methods),
                  n_trials=int(s.get("n_trials", 200)), seed=int(s.get("seed", 0)),
                  description=s.get("description", ""), x_axis=s.get("x_axis"))
        if "metrics" in s:
            kw["metrics"] = tuple(m.strip() for m in s["metrics"].split(","))
        sc = Scenario(**kw)
        sc.validate()
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    return sc
