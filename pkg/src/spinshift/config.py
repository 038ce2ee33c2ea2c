"""Run configuration: one versioned schema shared by every subcommand.

A config is a JSON or YAML mapping. Every section is optional; unknown keys
anywhere raise ConfigError. Example (YAML)::

    schema_version: 1
    species:
      - preset: 129Xe
        lambda: 5.3e-3
      - name: 131Xe
        gamma_mhz_per_nt: 3.515769
        D: 0.45
        lambda: 13.0e-3
    geometry: {L: 1.0}
    field: {kind: quadratic_gradient, B0: 20000, strength: 10}
    solver: {N: 40, use_b_tot: auto}
    sweep: {L: {start: 0.5, stop: 2.0, num: 4}, workers: 2}

Temperatures are given in degrees Celsius (``T_ref_C``) and converted to
kelvin internally.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .domain import XE129, XE131, CellGeometry, SpinSpecies
from .fields import FieldModel, Polynomial, build_field
from .units import celsius_to_kelvin, gamma_from_mhz_per_nt

SCHEMA_VERSION = 1
PRESETS = {"129Xe": XE129, "131Xe": XE131}


class ConfigError(ValueError):
    pass


# section -> {key: default}; a default of REQUIRED means the key must be present
REQUIRED = object()

SCHEMA = {
    "geometry": {"L": 1.0},
    "field": {"kind": "uniform", "B0": 20000.0, "strength": 0.0,
              "bz1": None, "bx": None, "by": None},
    "solver": {"N": 40, "use_b_tot": "auto", "method": "analytic", "sum_mode": "complete",
               "hops": 1},
    "sweep": {"L": None, "lambda": None, "G": None, "workers": 1},
    "fid": {"t_end": None, "dt": None, "frame": "rotating", "system": "rwa", "dressed": True,
            "discard": None, "max_residual": 1e-6, "N": None, "method": "expm"},
    "comag": {"G1": 10.0, "G2": 10.0, "L": {"start": 0.2, "stop": 4.0, "num": 96}},
    "wallfit": {"input": None, "L": 0.8, "D": 0.45, "T_ref_C": 110.0, "species": ""},
    "eigs": {"lambda": [0.0], "N": 10, "L": 1.0},
    "output": {"path": None, "format": "csv"},
}
SPECIES_KEYS = {"preset", "name", "gamma", "gamma_mhz_per_nt", "D", "Gamma20", "Gamma10", "Rp",
                "lambda"}
TOP_KEYS = {"schema_version", "species"} | set(SCHEMA)


def _check_keys(section, data, allowed):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping, got {type(data).__name__}")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _number(section, key, value, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{section}.{key} must be positive, got {value}")
    if nonneg and value < 0:
        raise ConfigError(f"{section}.{key} must be nonnegative, got {value}")
    return int(value) if integer else float(value)


def parse_grid(spec, name="grid"):
    """List of numbers, a scalar, or {start, stop, num, log}."""
    if spec is None:
        return None
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.array([float(spec)])
    if isinstance(spec, list):
        return np.array([_number(name, "item", v) for v in spec])
    if isinstance(spec, dict):
        _check_keys(name, spec, {"start", "stop", "num", "log"})
        try:
            start, stop, num = spec["start"], spec["stop"], spec["num"]
        except KeyError as exc:
            raise ConfigError(f"{name} needs start, stop and num") from exc
        start = _number(name, "start", start)
        stop = _number(name, "stop", stop)
        num = _number(name, "num", num, positive=True, integer=True)
        if spec.get("log", False):
            if start <= 0 or stop <= 0:
                raise ConfigError(f"{name}: log grid needs positive bounds")
            return np.geomspace(start, stop, num)
        return np.linspace(start, stop, num)
    raise ConfigError(f"{name}: cannot interpret grid {spec!r}")


def parse_species(item, index):
    where = f"species[{index}]"
    if isinstance(item, str):
        item = {"preset": item}
    _check_keys(where, item, SPECIES_KEYS)
    base = None
    if "preset" in item:
        if item["preset"] not in PRESETS:
            raise ConfigError(f"{where}: unknown preset {item['preset']!r}; "
                              f"known: {sorted(PRESETS)}")
        base = PRESETS[item["preset"]]
    if "gamma" in item and "gamma_mhz_per_nt" in item:
        raise ConfigError(f"{where}: give gamma or gamma_mhz_per_nt, not both")
    kw = {}
    if base is not None:
        kw = dict(name=base.name, gamma=base.gamma, D=base.D, Gamma20=base.Gamma20,
                  Gamma10=base.Gamma10, Rp=base.Rp, lam=base.lam)
    if "name" in item:
        kw["name"] = str(item["name"])
    if "gamma" in item:
        kw["gamma"] = _number(where, "gamma", item["gamma"])
    if "gamma_mhz_per_nt" in item:
        kw["gamma"] = gamma_from_mhz_per_nt(_number(where, "gamma_mhz_per_nt",
                                                    item["gamma_mhz_per_nt"]))
    for key, attr in (("D", "D"), ("Gamma20", "Gamma20"), ("Gamma10", "Gamma10"),
                      ("Rp", "Rp"), ("lambda", "lam")):
        if key in item:
            kw[attr] = _number(where, key, item[key], nonneg=True)
    for need in ("name", "gamma", "D"):
        if need not in kw:
            raise ConfigError(f"{where}: missing '{need}' (or use a preset)")
    try:
        return SpinSpecies(**kw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _poly(section, key, spec):
    if spec is None:
        return None
    try:
        return Polynomial.from_spec(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def parse_field(sec) -> FieldModel:
    kind = sec["kind"]
    B0 = _number("field", "B0", sec["B0"])
    strength = _number("field", "strength", sec["strength"])
    comps = {k: _poly("field", k, sec[k]) for k in ("bz1", "bx", "by")}
    if kind != "custom" and any(v is not None for v in comps.values()):
        raise ConfigError("field: bz1/bx/by are only allowed with kind 'custom'")
    try:
        if kind == "custom":
            return build_field(kind, B0, **{k: v for k, v in comps.items() if v is not None})
        return build_field(kind, B0, strength)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    species: tuple
    geometry: CellGeometry
    field: FieldModel
    sections: dict  # normalized per-section dicts with defaults filled in
    raw: dict = field(default_factory=dict)

    @property
    def solver(self):
        return self.sections["solver"]

    def section(self, name):
        return self.sections[name]

    def species_named(self, name):
        for s in self.species:
            if s.name == name:
                return s
        raise ConfigError(f"no species named {name!r}")

    @property
    def config_hash(self):
        return config_hash(self.raw)


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(raw):
    text = json.dumps(_canonical(raw), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def parse_config(data: Optional[dict]) -> RunConfig:
    data = {} if data is None else data
    _check_keys("config", data, TOP_KEYS)
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}")

    sections = {}
    for name, defaults in SCHEMA.items():
        given = data.get(name, {}) or {}
        _check_keys(name, given, defaults)
        merged = dict(defaults)
        merged.update(given)
        sections[name] = merged

    species_raw = data.get("species", ["129Xe", "131Xe"])
    if not isinstance(species_raw, list) or not species_raw:
        raise ConfigError("species must be a non-empty list")
    species = tuple(parse_species(item, i) for i, item in enumerate(species_raw))

    L = _number("geometry", "L", sections["geometry"]["L"], positive=True)
    geometry = CellGeometry(L)
    fld = parse_field(sections["field"])

    s = sections["solver"]
    s["N"] = _number("solver", "N", s["N"], positive=True, integer=True)
    s["hops"] = _number("solver", "hops", s["hops"], positive=True, integer=True)
    if s["use_b_tot"] not in ("auto", "all", "none"):
        raise ConfigError("solver.use_b_tot must be auto, all or none")
    if s["method"] not in ("analytic", "quadrature"):
        raise ConfigError("solver.method must be analytic or quadrature")
    if s["sum_mode"] not in ("complete", "truncated"):
        raise ConfigError("solver.sum_mode must be complete or truncated")

    sw = sections["sweep"]
    for key in ("L", "lambda", "G"):
        sw[key] = parse_grid(sw[key], f"sweep.{key}")
    sw["workers"] = _number("sweep", "workers", sw["workers"], positive=True, integer=True)

    cm = sections["comag"]
    cm["G1"] = _number("comag", "G1", cm["G1"])
    cm["G2"] = _number("comag", "G2", cm["G2"])
    cm["L"] = parse_grid(cm["L"], "comag.L")

    fd = sections["fid"]
    if fd["frame"] not in ("rotating", "lab"):
        raise ConfigError("fid.frame must be rotating or lab")
    if fd["system"] not in ("rwa", "full"):
        raise ConfigError("fid.system must be rwa or full")
    if fd["system"] == "full" and fd["frame"] != "lab":
        raise ConfigError("fid.system 'full' is integrated in the lab frame; set fid.frame: lab")
    if fd["method"] not in ("expm", "adaptive"):
        raise ConfigError("fid.method must be expm or adaptive")
    for key in ("t_end", "dt", "discard"):
        if fd[key] is not None:
            fd[key] = _number("fid", key, fd[key], nonneg=True)
    if fd["N"] is not None:
        fd["N"] = _number("fid", "N", fd["N"], positive=True, integer=True)
    fd["max_residual"] = _number("fid", "max_residual", fd["max_residual"], positive=True)

    wf = sections["wallfit"]
    wf["L"] = _number("wallfit", "L", wf["L"], positive=True)
    wf["D"] = _number("wallfit", "D", wf["D"], positive=True)
    wf["T_ref_K"] = celsius_to_kelvin(_number("wallfit", "T_ref_C", wf["T_ref_C"]))

    eg = sections["eigs"]
    eg["lambda"] = parse_grid(eg["lambda"], "eigs.lambda")
    if np.any(eg["lambda"] < 0):
        raise ConfigError("eigs.lambda must be nonnegative")
    eg["N"] = _number("eigs", "N", eg["N"], positive=True, integer=True)
    eg["L"] = _number("eigs", "L", eg["L"], positive=True)

    out = sections["output"]
    if out["format"] not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")

    return RunConfig(species, geometry, fld, sections, _canonical(data))


def load_config(path) -> RunConfig:
    """Read a JSON (.json) or YAML (anything else) config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            import yaml
            data = yaml.safe_load(text)
    except Exception as exc:  # malformed file
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parse_config(data)
