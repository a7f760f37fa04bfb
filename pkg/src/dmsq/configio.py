"""Config-file ingestion (TOML or JSON) and parameter-path addressing.

File schema::

    unit = "MHz"                  # optional label; rates are in kappa units otherwise

    [cavity]
    kappa = 1.0
    opa_gain = 0.45
    opa_phase = 3.14159265358979

    [[mechanical]]                # one table per mechanical mode
    omega = 10.0
    gamma = 1.0e-5
    coupling = 0.1
    nbar = 10.0

    [[hopping]]                   # one table per chain link (N - 1 of them)
    strength = 0.1
    phase = 1.5707963267948966

    [sweep]                       # optional, for the sweep engine
    outputs = ["b1", "b2"]
    [[sweep.axes]]
    path = "hop_phase[0]"
    grid = { start = 0.0, stop = 6.283185307179586, count = 101, scale = "linear" }

JSON files carry the same structure as nested objects/arrays.

Parameter paths accept both the flat field names of ``SystemConfig``
(``opa_gain``, ``nbar[1]``, ``hop_phase[0]``; a bare list name broadcasts
to all entries) and the file-schema spelling (``cavity.opa_gain``,
``mechanical[1].nbar``, ``hopping[0].phase``).
"""

from __future__ import annotations

import json
import re
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, ConfigParseError
from .model import SystemConfig

_SCALAR_FIELDS = {"kappa", "opa_gain", "opa_phase"}
_MODE_FIELDS = {"omega", "gamma", "coupling", "nbar"}
_LINK_FIELDS = {"hop_strength", "hop_phase"}
_HOPPING_ALIASES = {"strength": "hop_strength", "phase": "hop_phase"}

_PATH_RE = re.compile(
    r"^(?:(?P<group>cavity|mechanical|hopping)(?:\[(?P<gidx>\d+)\])?\.)?"
    r"(?P<field>[a-z_]+)(?:\[(?P<fidx>\d+)\])?$"
)


def parse_path(path: str) -> tuple[str, int | None]:
    """Normalize a parameter path to (SystemConfig field, index-or-None).

    ``None`` index on a list field means broadcast to every entry.
    """
    m = _PATH_RE.match(path.strip())
    if not m:
        raise ConfigError(f"malformed parameter path {path!r}")
    group, gidx, field, fidx = m.group("group", "gidx", "field", "fidx")
    if gidx is not None and fidx is not None:
        raise ConfigError(f"parameter path {path!r} has two indices")
    idx = int(gidx) if gidx is not None else (int(fidx) if fidx is not None else None)

    if group == "cavity":
        if field not in _SCALAR_FIELDS or idx is not None:
            raise ConfigError(f"unknown cavity parameter in path {path!r}")
        return field, None
    if group == "mechanical":
        if field not in _MODE_FIELDS:
            raise ConfigError(f"unknown mechanical parameter in path {path!r}")
        return field, idx
    if group == "hopping":
        if field not in _HOPPING_ALIASES:
            raise ConfigError(f"unknown hopping parameter in path {path!r}")
        return _HOPPING_ALIASES[field], idx

    if field in _SCALAR_FIELDS:
        if idx is not None:
            raise ConfigError(f"scalar parameter {field!r} cannot be indexed in {path!r}")
        return field, None
    if field in _MODE_FIELDS or field in _LINK_FIELDS:
        return field, idx
    raise ConfigError(f"unknown parameter {field!r} in path {path!r}")


def set_param(cfg: SystemConfig, path: str, value: float) -> SystemConfig:
    """Return a copy of ``cfg`` with the addressed parameter replaced."""
    field, idx = parse_path(path)
    value = float(value)
    if field in _SCALAR_FIELDS:
        return replace(cfg, **{field: value})
    current = list(getattr(cfg, field))
    if idx is None:
        current = [value] * len(current)
    else:
        if idx >= len(current):
            raise ConfigError(
                f"index {idx} out of range for '{field}' (length {len(current)})"
            )
        current[idx] = value
    return replace(cfg, **{field: tuple(current)})


def get_param(cfg: SystemConfig, path: str) -> float:
    field, idx = parse_path(path)
    val = getattr(cfg, field)
    if field in _SCALAR_FIELDS:
        return float(val)
    if idx is None:
        raise ConfigError(f"path {path!r} needs an index to read a single value")
    if idx >= len(val):
        raise ConfigError(f"index {idx} out of range for '{field}' (length {len(val)})")
    return float(val[idx])


def parse_override(text: str) -> tuple[str, float]:
    """Split a ``path=value`` override string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form path=value")
    path, _, raw = text.partition("=")
    path = path.strip()
    try:
        value = float(raw.strip())
    except ValueError:
        raise ConfigError(f"override {text!r} has a non-numeric value") from None
    parse_path(path)
    return path, value


def _parse_file(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix == ".json":
        parsers = ("json",)
    elif suffix == ".toml":
        parsers = ("toml",)
    else:
        parsers = ("toml", "json")

    last_exc: ConfigParseError | None = None
    for kind in parsers:
        try:
            if kind == "json":
                return json.loads(text)
            return tomllib.loads(text)
        except json.JSONDecodeError as exc:
            last_exc = ConfigParseError(
                f"{path}: JSON parse error: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                line=exc.lineno,
                column=exc.colno,
            )
        except tomllib.TOMLDecodeError as exc:
            line, column = _toml_position(str(exc))
            last_exc = ConfigParseError(f"{path}: TOML parse error: {exc}", line=line, column=column)
    assert last_exc is not None
    raise last_exc


def _toml_position(message: str) -> tuple[int | None, int | None]:
    m = re.search(r"line (\d+), column (\d+)", message)
    if m:
        return int(m.group(1)), int(m.group(2))
    return None, None


def _require(data: dict, key: str, context: str) -> object:
    if key not in data:
        raise ConfigError(f"missing field '{key}' in {context}")
    return data[key]


def system_config_from_dict(data: dict) -> SystemConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table/object")
    cavity = _require(data, "cavity", "config")
    if not isinstance(cavity, dict):
        raise ConfigError("'cavity' must be a table")
    mechanical = _require(data, "mechanical", "config")
    if not isinstance(mechanical, list) or not mechanical:
        raise ConfigError("'mechanical' must be a non-empty array of tables")
    hopping = data.get("hopping", [])
    if not isinstance(hopping, list):
        raise ConfigError("'hopping' must be an array of tables")

    n = len(mechanical)
    modes = {f: [] for f in ("omega", "gamma", "coupling", "nbar")}
    for i, entry in enumerate(mechanical):
        for f in modes:
            modes[f].append(float(_require(entry, f, f"mechanical[{i}]")))
    links = {"strength": [], "phase": []}
    for i, entry in enumerate(hopping):
        for f in links:
            links[f].append(float(_require(entry, f, f"hopping[{i}]")))

    return SystemConfig(
        n_mech=n,
        kappa=float(_require(cavity, "kappa", "cavity")),
        omega=tuple(modes["omega"]),
        gamma=tuple(modes["gamma"]),
        coupling=tuple(modes["coupling"]),
        nbar=tuple(modes["nbar"]),
        hop_strength=tuple(links["strength"]),
        hop_phase=tuple(links["phase"]),
        opa_gain=float(cavity.get("opa_gain", 0.0)),
        opa_phase=float(cavity.get("opa_phase", 0.0)),
        unit=data.get("unit"),
    )


def system_config_to_dict(cfg: SystemConfig) -> dict:
    out: dict = {}
    if cfg.unit is not None:
        out["unit"] = cfg.unit
    out["cavity"] = {
        "kappa": cfg.kappa,
        "opa_gain": cfg.opa_gain,
        "opa_phase": cfg.opa_phase,
    }
    out["mechanical"] = [
        {
            "omega": cfg.omega[l],
            "gamma": cfg.gamma[l],
            "coupling": cfg.coupling[l],
            "nbar": cfg.nbar[l],
        }
        for l in range(cfg.n_mech)
    ]
    out["hopping"] = [
        {"strength": cfg.hop_strength[l], "phase": cfg.hop_phase[l]}
        for l in range(cfg.n_mech - 1)
    ]
    return out


def load_system_config(path: str | Path) -> SystemConfig:
    """Read a TOML or JSON config file into a ``SystemConfig``."""
    return system_config_from_dict(_parse_file(path))


def grid_from_spec(grid: dict) -> tuple[float, ...]:
    """Materialize a {start, stop, count, scale} grid description."""
    start = float(_require(grid, "start", "grid"))
    stop = float(_require(grid, "stop", "grid"))
    count = int(_require(grid, "count", "grid"))
    if count < 1:
        raise ConfigError(f"grid count must be >= 1, got {count}")
    scale = grid.get("scale", "linear")
    if scale == "linear":
        values = np.linspace(start, stop, count)
    elif scale == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log-scaled grids need positive start/stop")
        values = np.geomspace(start, stop, count)
    else:
        raise ConfigError(f"unknown grid scale {scale!r} (use 'linear' or 'log')")
    return tuple(float(x) for x in values)


def load_sweep_spec(path: str | Path):
    """Read a config file with a [sweep] section into a ``SweepSpec``."""
    from .sweep import SweepAxis, SweepSpec

    data = _parse_file(path)
    base = system_config_from_dict(data)
    sweep = _require(data, "sweep", "config")
    if not isinstance(sweep, dict):
        raise ConfigError("'sweep' must be a table")
    axes_data = _require(sweep, "axes", "[sweep]")
    if not isinstance(axes_data, list) or not axes_data:
        raise ConfigError("'sweep.axes' must be a non-empty array of tables")
    axes = []
    for i, axis in enumerate(axes_data):
        p = str(_require(axis, "path", f"sweep.axes[{i}]"))
        parse_path(p)
        grid = _require(axis, "grid", f"sweep.axes[{i}]")
        if isinstance(grid, dict):
            values = grid_from_spec(grid)
        else:
            values = tuple(float(x) for x in grid)
        axes.append(SweepAxis(path=p, grid=values))
    outputs = sweep.get("outputs")
    return SweepSpec(
        base=base,
        axes=tuple(axes),
        outputs=tuple(outputs) if outputs is not None else None,
        name=sweep.get("name"),
    )
