"""YAML scenario files with mandatory units, mapped onto ScenarioConfig.

Dimensioned values are strings such as ``"12 km"`` or ``"-120 dBW"``; counts
and space-angle errors are plain numbers. Loading rejects unknown keys and
reports the offending key path and line.
"""
from __future__ import annotations

import math
import re
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from .channel import RURAL_KA_SHADOW_STD, SPEED_OF_LIGHT, ElevationTable, PathLossConfig
from .geometry import OrbitConfig
from .simulator import ArrayConfig, ScenarioConfig
from .uncertainty import ErrorDistribution

UNITS = {
    "length": {"m": 1.0, "km": 1e3, "cm": 1e-2, "mm": 1e-3},
    "angle": {"deg": math.pi / 180, "rad": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "power": {"W": 1.0, "mW": 1e-3},
    "gain": {"dBi": 1.0},
    "loss": {"dB": 1.0},
}
_LOG_POWER = {"dBW": 0.0, "dBm": -30.0}
_WAVELENGTH_UNITS = ("lambda", "wavelength", "wavelengths")
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")

SCHEMA = {
    "seed": None,
    "trials": None,
    "carrier": None,
    "tx_power": None,
    "noise_power": None,
    "gain_mode": None,
    "channel_model": None,
    "methods": None,
    "gain_draws": None,
    "orbit": {"altitude": None, "earth_radius": None},
    "swarm": {"n_sats": None, "spacing": None, "mean_elevation": None},
    "arrays": {"satellite": {"nx": None, "ny": None, "spacing": None},
               "receiver": {"nx": None, "ny": None, "spacing": None}},
    "path_loss": {"tx_gain": None, "rx_gain": None, "clutter_loss": None, "shadow_std": None,
                  "gas_loss": None, "scintillation_loss": None},
    "errors": {"satellite": None, "receiver": None},
    "sweep": {"distances": None, "powers": None, "pass_samples": None,
              "pass_elevations": None, "angle_grid": None},
}
REQUIRED = ("swarm.n_sats", "swarm.spacing", "arrays.satellite", "arrays.receiver")


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the key path and line when known."""


class _Doc:
    """Parsed mapping plus the source line of every key path."""

    def __init__(self, data, lines, source):
        self.data, self.lines, self.source = data, lines, source

    def where(self, path: str) -> str:
        line = self.lines.get(path)
        return f"{self.source}:{line}: {path}" if line else f"{self.source}: {path}"

    def fail(self, path: str, msg: str):
        raise ScenarioError(f"{self.where(path)}: {msg}")

    def get(self, path: str, default=None):
        node = self.data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def has(self, path: str) -> bool:
        return self.get(path, _MISSING) is not _MISSING


_MISSING = object()


def _record_lines(node, path, lines, source):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for key, value in node.value:
            name = key.value
            sub = f"{path}.{name}" if path else name
            if name in seen:
                raise ScenarioError(f"{source}:{key.start_mark.line + 1}: duplicate key {sub}")
            seen.add(name)
            _record_lines(value, sub, lines, source)
            lines[sub] = key.start_mark.line + 1


def _parse_text(text: str, source: str) -> _Doc:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ScenarioError(f"{where}: parse error: {getattr(exc, 'problem', exc)}") from None
    lines = {}
    if node is not None:
        _record_lines(node, "", lines, source)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}:1: top level must be a mapping")
    return _Doc(data, lines, source)


def _check_keys(doc: _Doc, data, schema, prefix=""):
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in schema:
            allowed = ", ".join(sorted(schema))
            doc.fail(path, f"unknown key (allowed here: {allowed})")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                doc.fail(path, "expected a mapping")
            _check_keys(doc, value, sub, path)


def _quantity(doc: _Doc, path: str, kind: str, carrier: float | None = None) -> float:
    raw = doc.get(path)
    if isinstance(raw, bool) or raw is None:
        doc.fail(path, f"expected a {kind} with a unit")
    if isinstance(raw, (int, float)):
        doc.fail(path, f"unit required for {kind} (e.g. {_example(kind)})")
    return _parse_quantity(doc, path, str(raw), kind, carrier)


def _example(kind: str) -> str:
    return {"length": "'12 km'", "angle": "'30 deg'", "frequency": "'20 GHz'",
            "power": "'10 W' or '10 dBW'", "gain": "'17.4 dBi'", "loss": "'3 dB'"}[kind]


def _parse_quantity(doc: _Doc, path: str, raw: str, kind: str, carrier=None) -> float:
    m = _QUANTITY.match(raw)
    if not m:
        doc.fail(path, f"cannot read {raw!r} as a {kind} with a unit (e.g. {_example(kind)})")
    value, unit = float(m.group(1)), m.group(2)
    if kind == "power" and unit in _LOG_POWER:
        return 10 ** ((value + _LOG_POWER[unit]) / 10)
    if kind == "length" and unit in _WAVELENGTH_UNITS:
        if carrier is None:
            doc.fail(path, "wavelength units need a carrier frequency")
        return value * SPEED_OF_LIGHT / carrier
    table = UNITS[kind]
    if unit not in table:
        extra = list(_LOG_POWER) if kind == "power" else []
        extra += list(_WAVELENGTH_UNITS[:1]) if kind == "length" else []
        doc.fail(path, f"unit {unit!r} not valid for a {kind}; use one of "
                       f"{', '.join(list(table) + extra)}")
    return value * table[unit]


def _integer(doc: _Doc, path: str, minimum: int = 0) -> int:
    raw = doc.get(path)
    if isinstance(raw, bool) or not isinstance(raw, int):
        doc.fail(path, f"expected an integer, got {raw!r}")
    if raw < minimum:
        doc.fail(path, f"must be >= {minimum}")
    return int(raw)


def _number(doc: _Doc, path: str) -> float:
    raw = doc.get(path)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        doc.fail(path, f"expected a plain number, got {raw!r}")
    return float(raw)


def _array(doc: _Doc, path: str, carrier: float) -> ArrayConfig:
    if not isinstance(doc.get(path), dict):
        doc.fail(path, "expected a mapping with nx, ny, spacing")
    if not doc.has(f"{path}.nx"):
        doc.fail(f"{path}.nx", "missing required key")
    if not doc.has(f"{path}.spacing"):
        doc.fail(f"{path}.spacing", "missing required key")
    ny = _integer(doc, f"{path}.ny", 1) if doc.has(f"{path}.ny") else 1
    nx = _integer(doc, f"{path}.nx", 1)
    spacing = _quantity(doc, f"{path}.spacing", "length", carrier)
    try:
        return ArrayConfig(nx, ny, spacing)
    except ValueError as exc:
        doc.fail(path, str(exc))


def _table(doc: _Doc, path: str) -> ElevationTable:
    raw = doc.get(path)
    if raw == "rural-ka":
        return RURAL_KA_SHADOW_STD
    if isinstance(raw, str):
        return ElevationTable.constant(_parse_quantity(doc, path, raw, "loss"))
    if isinstance(raw, list) and raw:
        pts = []
        for i, item in enumerate(raw):
            sub = f"{path}[{i}]"
            if not (isinstance(item, list) and len(item) == 2):
                doc.fail(path, f"entry {i} must be a pair [elevation, value]")
            pts.append((_parse_quantity(doc, sub, str(item[0]), "angle"),
                        _parse_quantity(doc, sub, str(item[1]), "loss")))
        return ElevationTable(tuple(pts))
    doc.fail(path, "expected 'rural-ka', a value such as '2 dB', or a list of "
                   "[elevation, dB] pairs")


def _error_law(doc: _Doc, path: str, base_dir: Path) -> ErrorDistribution:
    raw = doc.get(path)
    if raw == "none" or raw is None:
        return ErrorDistribution.none()
    if not isinstance(raw, dict) or "law" not in raw:
        doc.fail(path, "expected 'none' or a mapping with a 'law' key")
    law = raw["law"]
    allowed = {"none": {"law"}, "uniform": {"law", "max"}, "gaussian": {"law", "sigma"},
               "tabulated": {"law", "file", "values", "density"}}
    if law not in allowed:
        doc.fail(f"{path}.law", f"unknown law {law!r}; use one of {', '.join(allowed)}")
    extra = set(raw) - allowed[law]
    if extra:
        doc.fail(f"{path}.{sorted(extra)[0]}", f"unknown key for law {law!r}")
    try:
        if law == "none":
            return ErrorDistribution.none()
        if law == "uniform":
            return ErrorDistribution.uniform(_number(doc, f"{path}.max"))
        if law == "gaussian":
            return ErrorDistribution.gaussian(_number(doc, f"{path}.sigma"))
        if "file" in raw:
            return ErrorDistribution.from_table_file(base_dir / str(raw["file"]))
        if "values" in raw and "density" in raw:
            return ErrorDistribution.tabulated(raw["values"], raw["density"])
        doc.fail(path, "tabulated law needs 'file' or 'values' and 'density'")
    except ScenarioError:
        raise
    except (ValueError, OSError) as exc:
        doc.fail(path, str(exc))


def _range(doc: _Doc, path: str, kind: str) -> tuple:
    raw = doc.get(path)
    if isinstance(raw, list):
        return tuple(_parse_quantity(doc, f"{path}[{i}]", str(v), kind) for i, v in enumerate(raw))
    if isinstance(raw, dict):
        keys = set(raw)
        if keys == {"start", "stop", "step"}:
            start = _quantity(doc, f"{path}.start", kind)
            stop = _quantity(doc, f"{path}.stop", kind)
            step = _quantity(doc, f"{path}.step", kind)
            if not step > 0 or stop < start:
                doc.fail(path, "need step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step * (1 + 1e-12))) + 1
            return tuple(float(start + i * step) for i in range(n))
        if keys in ({"start", "stop", "num"}, {"start", "stop", "num", "scale"}):
            start = _quantity(doc, f"{path}.start", kind)
            stop = _quantity(doc, f"{path}.stop", kind)
            num = _integer(doc, f"{path}.num", 1)
            if raw.get("scale", "linear") == "log":
                if not (start > 0 and stop > 0):
                    doc.fail(path, "log scale needs positive limits")
                return tuple(float(v) for v in np.geomspace(start, stop, num))
            if raw.get("scale", "linear") != "linear":
                doc.fail(f"{path}.scale", "scale must be 'linear' or 'log'")
            return tuple(float(v) for v in np.linspace(start, stop, num))
    doc.fail(path, "expected a list of values or {start, stop, step} / {start, stop, num}")


def _build(doc: _Doc, base_dir: Path) -> ScenarioConfig:
    _check_keys(doc, doc.data, SCHEMA)
    missing = [k for k in REQUIRED if not doc.has(k)]
    if missing:
        raise ScenarioError(f"{doc.source}: missing required keys: {', '.join(missing)}")

    kw = {}
    carrier = _quantity(doc, "carrier", "frequency") if doc.has("carrier") else 20e9
    kw["carrier"] = carrier
    if doc.has("seed"):
        kw["seed"] = _integer(doc, "seed")
    if doc.has("trials"):
        kw["trials"] = _integer(doc, "trials", 1)
    if doc.has("gain_draws"):
        kw["gain_draws"] = _integer(doc, "gain_draws", 1)
    if doc.has("tx_power"):
        kw["tx_power"] = _quantity(doc, "tx_power", "power")
    if doc.has("noise_power"):
        kw["noise_power"] = _quantity(doc, "noise_power", "power")
    for key in ("gain_mode", "channel_model"):
        if doc.has(key):
            kw[key] = str(doc.get(key))
    if doc.has("methods"):
        methods = doc.get("methods")
        if not isinstance(methods, list):
            doc.fail("methods", "expected a list")
        kw["methods"] = tuple(str(m) for m in methods)

    orbit_kw = {}
    if doc.has("orbit.altitude"):
        orbit_kw["altitude"] = _quantity(doc, "orbit.altitude", "length")
    if doc.has("orbit.earth_radius"):
        orbit_kw["earth_radius"] = _quantity(doc, "orbit.earth_radius", "length")
    try:
        kw["orbit"] = OrbitConfig(**orbit_kw)
    except ValueError as exc:
        doc.fail("orbit", str(exc))

    kw["n_sats"] = _integer(doc, "swarm.n_sats", 1)
    kw["spacing"] = _quantity(doc, "swarm.spacing", "length")
    if doc.has("swarm.mean_elevation"):
        kw["mean_elevation"] = _quantity(doc, "swarm.mean_elevation", "angle")
    kw["sat_array"] = _array(doc, "arrays.satellite", carrier)
    kw["rx_array"] = _array(doc, "arrays.receiver", carrier)

    pl = {}
    for key, field_name in (("tx_gain", "tx_gain_db"), ("rx_gain", "rx_gain_db")):
        if doc.has(f"path_loss.{key}"):
            pl[field_name] = _quantity(doc, f"path_loss.{key}", "gain")
    if doc.has("path_loss.clutter_loss"):
        pl["clutter_loss_db"] = _quantity(doc, "path_loss.clutter_loss", "loss")
    for key, field_name in (("shadow_std", "shadow_std_db"), ("gas_loss", "gas_loss_db"),
                            ("scintillation_loss", "scintillation_loss_db")):
        if doc.has(f"path_loss.{key}"):
            pl[field_name] = _table(doc, f"path_loss.{key}")
    try:
        kw["path_loss"] = PathLossConfig(**pl)
    except ValueError as exc:
        doc.fail("path_loss", str(exc))

    kw["sat_error"] = _error_law(doc, "errors.satellite", base_dir)
    kw["rx_error"] = _error_law(doc, "errors.receiver", base_dir)

    if doc.has("sweep.distances"):
        kw["distances"] = _range(doc, "sweep.distances", "length")
    if doc.has("sweep.powers"):
        kw["powers"] = _range(doc, "sweep.powers", "power")
    if doc.has("sweep.pass_samples"):
        kw["pass_samples"] = _integer(doc, "sweep.pass_samples", 1)
    if doc.has("sweep.pass_elevations"):
        lims = _range(doc, "sweep.pass_elevations", "angle")
        if len(lims) != 2:
            doc.fail("sweep.pass_elevations", "expected [start, stop]")
        kw["pass_elevations"] = lims
    if doc.has("sweep.angle_grid"):
        path = "sweep.angle_grid"
        raw = doc.get(path)
        if not isinstance(raw, dict) or set(raw) != {"start", "stop", "points"}:
            doc.fail(path, "expected {start, stop, points}")
        kw["angle_grid"] = (_quantity(doc, f"{path}.start", "angle"),
                            _quantity(doc, f"{path}.stop", "angle"),
                            _integer(doc, f"{path}.points", 2))
    try:
        return ScenarioConfig(**kw)
    except ValueError as exc:
        raise ScenarioError(f"{doc.source}: {exc}") from None


def loads_scenario(text: str, source: str = "<string>", base_dir=".") -> ScenarioConfig:
    return _build(_parse_text(text, source), Path(base_dir))


def load_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario file; defaults fill every optional key."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return loads_scenario(text, str(path), path.parent)


# ---------------------------------------------------------------- writing

def _q(value: float, unit: str) -> str:
    return f"{float(value)!r} {unit}"


def _dump_table(tab: ElevationTable):
    if tab.name == "rural-ka" and tab == RURAL_KA_SHADOW_STD:
        return "rural-ka"
    if len(tab.points) == 1:
        return _q(tab.points[0][1], "dB") if tab.points[0][0] == math.pi / 2 else \
            [[_q(tab.points[0][0], "rad"), _q(tab.points[0][1], "dB")]]
    return [[_q(e, "rad"), _q(v, "dB")] for e, v in tab.points]


def _dump_law(dist: ErrorDistribution):
    if dist.kind == "none":
        return "none"
    if dist.kind == "uniform":
        return {"law": "uniform", "max": dist.param}
    if dist.kind == "gaussian":
        return {"law": "gaussian", "sigma": dist.param}
    return {"law": "tabulated", "values": [float(v) for v in dist.grid],
            "density": [float(v) for v in dist.density]}


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Plain mapping in SI units that ``loads_scenario`` turns back into ``cfg``."""
    out = {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "carrier": _q(cfg.carrier, "Hz"),
        "tx_power": _q(cfg.tx_power, "W"),
        "noise_power": _q(cfg.noise_power, "W"),
        "gain_mode": cfg.gain_mode,
        "channel_model": cfg.channel_model,
        "methods": list(cfg.methods),
        "gain_draws": cfg.gain_draws,
        "orbit": {"altitude": _q(cfg.orbit.altitude, "m"),
                  "earth_radius": _q(cfg.orbit.earth_radius, "m")},
        "swarm": {"n_sats": cfg.n_sats, "spacing": _q(cfg.spacing, "m"),
                  "mean_elevation": _q(cfg.mean_elevation, "rad")},
        "arrays": {
            "satellite": {"nx": cfg.sat_array.nx, "ny": cfg.sat_array.ny,
                          "spacing": _q(cfg.sat_array.spacing, "m")},
            "receiver": {"nx": cfg.rx_array.nx, "ny": cfg.rx_array.ny,
                         "spacing": _q(cfg.rx_array.spacing, "m")},
        },
        "path_loss": {
            "tx_gain": _q(cfg.path_loss.tx_gain_db, "dBi"),
            "rx_gain": _q(cfg.path_loss.rx_gain_db, "dBi"),
            "clutter_loss": _q(cfg.path_loss.clutter_loss_db, "dB"),
            "shadow_std": _dump_table(cfg.path_loss.shadow_std_db),
            "gas_loss": _dump_table(cfg.path_loss.gas_loss_db),
            "scintillation_loss": _dump_table(cfg.path_loss.scintillation_loss_db),
        },
        "errors": {"satellite": _dump_law(cfg.sat_error), "receiver": _dump_law(cfg.rx_error)},
        "sweep": {
            "pass_samples": cfg.pass_samples,
            "pass_elevations": [_q(v, "rad") for v in cfg.pass_elevations],
            "angle_grid": {"start": _q(cfg.angle_grid[0], "rad"),
                           "stop": _q(cfg.angle_grid[1], "rad"),
                           "points": int(cfg.angle_grid[2])},
        },
    }
    if cfg.distances:
        out["sweep"]["distances"] = [_q(d, "m") for d in cfg.distances]
    if cfg.powers:
        out["sweep"]["powers"] = [_q(p, "W") for p in cfg.powers]
    return out


def dumps_scenario(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(scenario_to_dict(cfg), sort_keys=False, default_flow_style=None, width=100)


def dump_scenario(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps_scenario(cfg), encoding="utf-8")


def with_overrides(cfg: ScenarioConfig, seed=None, trials=None) -> ScenarioConfig:
    """Command-line values win over the file, which wins over defaults."""
    kw = {}
    if seed is not None:
        kw["seed"] = int(seed)
    if trials is not None:
        kw["trials"] = int(trials)
    return replace(cfg, **kw) if kw else cfg


__all__ = ["ScenarioError", "load_scenario", "loads_scenario", "dump_scenario",
           "dumps_scenario", "scenario_to_dict", "with_overrides"]
