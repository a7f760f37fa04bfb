"""Declarative parameter sweeps, figure presets, thresholds, CSV export.

A sweep is a base config plus one or two swept parameter axes. Each grid
point is an independent pure computation (build matrices, test stability,
solve for the covariance, extract squeezing), so points may be evaluated
concurrently; rows are always assembled in row-major grid order and the
emitted values do not depend on the worker count. Unstable points carry
``stable = false`` and empty report fields, never numbers.
"""

from __future__ import annotations

import concurrent.futures
import csv
import datetime
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .analysis import quadrature_variance, squeezing_degree
from .configio import set_param, system_config_to_dict
from .errors import ConfigError, ThresholdError, UnstableSystemError
from .model import SystemConfig, build_drift_matrix, build_noise_matrix, mode_labels, validate_config
from .steady_state import is_stable, solve_lyapunov

THREADS_ENV = "DMSQ_THREADS"


@dataclass(frozen=True)
class SweepAxis:
    path: str
    grid: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    """Base configuration, 1 or 2 swept axes, and the modes to report."""

    base: SystemConfig
    axes: tuple[SweepAxis, ...]
    outputs: tuple[str, ...] | None = None  # mode labels; None = all modes
    name: str | None = None

    def output_modes(self) -> tuple[str, ...]:
        if self.outputs is not None:
            return self.outputs
        return mode_labels(self.base.n_mech)


@dataclass(frozen=True)
class SweepResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    spec: SweepSpec
    metadata: dict

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _check_spec(spec: SweepSpec) -> None:
    if not 1 <= len(spec.axes) <= 2:
        raise ConfigError(f"a sweep needs 1 or 2 axes, got {len(spec.axes)}")
    for axis in spec.axes:
        if len(axis.grid) == 0:
            raise ConfigError(f"axis {axis.path!r} has an empty grid")
        if not all(math.isfinite(x) for x in axis.grid):
            raise ConfigError(f"axis {axis.path!r} has non-finite grid values")
        set_param(spec.base, axis.path, axis.grid[0])  # path must resolve
    valid = set(mode_labels(spec.base.n_mech))
    for m in spec.output_modes():
        if m not in valid:
            raise ConfigError(f"unknown output mode {m!r} for this config")


def _result_columns(spec: SweepSpec) -> tuple[str, ...]:
    cols = [axis.path for axis in spec.axes] + ["stable"]
    for m in spec.output_modes():
        cols += [f"S_X_{m}", f"S_Y_{m}", f"var_X_{m}", f"var_Y_{m}"]
    return tuple(cols)


def _eval_config(cfg: SystemConfig, modes: tuple[str, ...]) -> tuple:
    """(stable, field values...) for one configuration."""
    checked = validate_config(cfg)
    a = build_drift_matrix(checked)
    q = build_noise_matrix(checked)
    report = is_stable(a)
    if not report.stable:
        return (False,) + (None,) * (4 * len(modes))
    v = solve_lyapunov(a, q)
    fields: list[float] = []
    for m in modes:
        vx = quadrature_variance(v, m, "X")
        vy = quadrature_variance(v, m, "Y")
        fields += [squeezing_degree(vx), squeezing_degree(vy), vx, vy]
    return (True,) + tuple(fields)


def _grid_points(spec: SweepSpec):
    if len(spec.axes) == 1:
        for x in spec.axes[0].grid:
            yield (x,)
    else:
        for x in spec.axes[0].grid:
            for y in spec.axes[1].grid:
                yield (x, y)


def _apply_point(base: SystemConfig, spec: SweepSpec, values: tuple) -> SystemConfig:
    cfg = base
    for axis, val in zip(spec.axes, values):
        cfg = set_param(cfg, axis.path, val)
    return cfg


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _config_hash(spec: SweepSpec) -> str:
    payload = json.dumps(
        {
            "base": system_config_to_dict(spec.base),
            "axes": [[axis.path, list(axis.grid)] for axis in spec.axes],
            "outputs": list(spec.output_modes()),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the grid and tabulate stability plus squeezing fields.

    Rows appear in row-major order of the declared axes. The number of
    worker threads is capped by the ``DMSQ_THREADS`` environment variable
    (default 1) and has no effect on the emitted values.
    """
    _check_spec(spec)
    modes = spec.output_modes()
    points = list(_grid_points(spec))
    workers = min(_worker_count(), len(points))

    def evaluate(values: tuple) -> tuple:
        return values + _eval_config(_apply_point(spec.base, spec, values), modes)

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, points))
    else:
        rows = [evaluate(p) for p in points]

    metadata = {
        "config_hash": _config_hash(spec),
        "tool_version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "preset": spec.name,
    }
    return SweepResult(
        columns=_result_columns(spec), rows=tuple(rows), spec=spec, metadata=metadata
    )


def _field_value(spec: SweepSpec, x: float, field: str) -> float | None:
    cfg = set_param(spec.base, spec.axes[0].path, x)
    modes = spec.output_modes()
    row = _eval_config(cfg, modes)
    if field == "stable":
        return 1.0 if row[0] else 0.0
    cols = ["stable"] + [
        f"{kind}_{m}" for m in modes for kind in ("S_X", "S_Y", "var_X", "var_Y")
    ]
    try:
        val = row[cols.index(field)]
    except ValueError:
        raise ConfigError(f"unknown report field {field!r}") from None
    return val


def find_threshold(
    spec: SweepSpec, field: str, target: float, rtol: float = 1e-4
) -> float:
    """Bisect the single swept axis to where ``field`` crosses ``target``.

    The grid is scanned for the first adjacent pair bracketing the target
    (for ``field="stable"`` the values are 1/0 and any target in between
    locates the stability boundary); bisection then refines to relative
    tolerance ``rtol``.

    Raises
    ------
    ThresholdError
        If no sign change exists on the grid span, or an unstable point
        interrupts a squeezing-field search.
    """
    _check_spec(spec)
    if len(spec.axes) != 1:
        raise ConfigError("find_threshold needs a single-axis sweep")
    grid = spec.axes[0].grid

    def offset(x: float) -> float:
        val = _field_value(spec, x, field)
        if val is None:
            raise ThresholdError(
                f"field {field!r} undefined (unstable point) at {spec.axes[0].path} = {x:g}"
            )
        return val - target

    lo = None
    f_lo = None
    hi = None
    for x in grid:
        f_x = offset(x)
        if f_x == 0.0:
            return float(x)
        if f_lo is not None and f_lo * f_x < 0:
            lo, hi = prev_x, x
            break
        prev_x, f_lo = x, f_x
    if hi is None:
        raise ThresholdError(
            f"no crossing of {field!r} through {target:g} on the grid span "
            f"[{grid[0]:g}, {grid[-1]:g}]"
        )

    f_lo = offset(lo)
    while abs(hi - lo) > rtol * max(abs(lo), abs(hi), 1e-300):
        mid = 0.5 * (lo + hi)
        f_mid = offset(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"{value:.12g}"


def export_csv(result: SweepResult, destination) -> None:
    """Write the result table as CSV: header row, then one row per grid
    point, floats at 12 significant digits. Byte-for-byte deterministic
    for identical inputs (metadata is not embedded)."""
    if hasattr(destination, "write"):
        _write_csv(result, destination)
        return
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        _write_csv(result, fh)


def _write_csv(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_format_cell(x) for x in row])


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    _write_csv(result, buf)
    return buf.getvalue()


def rows_as_dicts(result: SweepResult) -> list[dict]:
    """Rows keyed by column name (the JSON mirror of the CSV schema)."""
    return [dict(zip(result.columns, row)) for row in result.rows]


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

_PI = math.pi
_GAIN_GRID = tuple(np.linspace(0.0, 0.49, 50))
_PHASE_GRID = tuple(np.linspace(0.0, 2.0 * _PI, 101))
_HOP_GRID = tuple(np.linspace(0.0, 0.5, 51))
_NBAR_GRID = tuple(np.geomspace(1e-3, 1e4, 71))
# cooperativity scan realized through the coupling, C = G^2/(kappa gamma)
_COOP_VALUES = tuple(np.geomspace(10.0, 1000.0, 25))


def _two_mode_base(coupling: float, nbar: float, eta: float, theta: float,
                   gain: float = 0.45, phi: float = _PI) -> SystemConfig:
    return SystemConfig(
        n_mech=2,
        kappa=1.0,
        omega=(10.0, 10.0),
        gamma=(1e-5, 1e-5),
        coupling=(coupling, coupling),
        nbar=(nbar, nbar),
        hop_strength=(eta,),
        hop_phase=(theta,),
        opa_gain=gain,
        opa_phase=phi,
    )


def _four_mode_base(eta: float, theta: float, gain: float = 0.45, phi: float = _PI) -> SystemConfig:
    return SystemConfig(
        n_mech=4,
        kappa=1.0,
        omega=(10.0,) * 4,
        gamma=(1e-5,) * 4,
        coupling=(0.1,) * 4,
        nbar=(10.0,) * 4,
        hop_strength=(eta,) * 3,
        hop_phase=(theta,) * 3,
        opa_gain=gain,
        opa_phase=phi,
    )


def _coupling_grid_for_cooperativity(kappa: float, gamma: float) -> tuple[float, ...]:
    return tuple(math.sqrt(c * kappa * gamma) for c in _COOP_VALUES)


def _build_presets() -> dict[str, SweepSpec]:
    presets: dict[str, SweepSpec] = {}

    # optical squeezing from the amplifier alone (no optomechanical coupling)
    opa_only = _two_mode_base(coupling=0.0, nbar=0.0, eta=0.0, theta=0.0)
    presets["fig2a"] = SweepSpec(
        base=opa_only,
        axes=(SweepAxis("opa_gain", _GAIN_GRID),),
        outputs=("a",),
        name="fig2a",
    )
    presets["fig2b"] = SweepSpec(
        base=opa_only,
        axes=(SweepAxis("opa_phase", _PHASE_GRID),),
        outputs=("a",),
        name="fig2b",
    )

    # squeezing transfer to the mechanics at zero temperature, no hopping
    transfer = _two_mode_base(coupling=0.1, nbar=0.0, eta=0.0, theta=0.0)
    presets["fig3a"] = SweepSpec(
        base=transfer,
        axes=(SweepAxis("opa_gain", _GAIN_GRID), SweepAxis("opa_phase", _PHASE_GRID)),
        outputs=("b1",),
        name="fig3a",
    )
    presets["fig3b"] = SweepSpec(
        base=transfer,
        axes=(SweepAxis("opa_gain", _GAIN_GRID), SweepAxis("opa_phase", _PHASE_GRID)),
        outputs=("b2",),
        name="fig3b",
    )
    presets["fig3c"] = SweepSpec(
        base=transfer,
        axes=(SweepAxis("opa_gain", _GAIN_GRID),),
        outputs=("b1", "b2"),
        name="fig3c",
    )
    presets["fig3d"] = SweepSpec(
        base=transfer,
        axes=(SweepAxis("opa_phase", _PHASE_GRID),),
        outputs=("b1", "b2"),
        name="fig3d",
    )

    # hot mechanics: hopping strength / modulation phase maps
    hot = _two_mode_base(coupling=0.1, nbar=10.0, eta=0.1, theta=0.5 * _PI)
    presets["fig4a"] = SweepSpec(
        base=hot,
        axes=(SweepAxis("hop_strength[0]", _HOP_GRID), SweepAxis("hop_phase[0]", _PHASE_GRID)),
        outputs=("b1",),
        name="fig4a",
    )
    presets["fig4b"] = SweepSpec(
        base=hot,
        axes=(SweepAxis("hop_strength[0]", _HOP_GRID), SweepAxis("hop_phase[0]", _PHASE_GRID)),
        outputs=("b2",),
        name="fig4b",
    )
    presets["fig4c"] = SweepSpec(
        base=hot,
        axes=(SweepAxis("hop_phase[0]", _PHASE_GRID),),
        outputs=("b1", "b2"),
        name="fig4c",
    )
    presets["fig4d"] = SweepSpec(
        base=hot,
        axes=(SweepAxis("hop_strength[0]", _HOP_GRID),),
        outputs=("b1", "b2"),
        name="fig4d",
    )

    # thermal tolerance and cooperativity, with the dark mode intact vs broken
    for label, eta, theta in (("dmu", 0.0, 0.0), ("dmb", 0.1, 0.5 * _PI)):
        presets[f"fig5a_{label}"] = SweepSpec(
            base=_two_mode_base(coupling=0.1, nbar=10.0, eta=eta, theta=theta),
            axes=(SweepAxis("nbar", _NBAR_GRID),),
            outputs=("b1", "b2"),
            name=f"fig5a_{label}",
        )
        presets[f"fig5b_{label}"] = SweepSpec(
            base=_two_mode_base(coupling=0.1, nbar=10.0, eta=eta, theta=theta),
            axes=(SweepAxis("coupling", _coupling_grid_for_cooperativity(1.0, 1e-5)),),
            outputs=("b1", "b2"),
            name=f"fig5b_{label}",
        )

    # four-mode chain
    chain = _four_mode_base(eta=0.1, theta=0.5 * _PI)
    presets["fig6a"] = SweepSpec(
        base=chain,
        axes=(SweepAxis("hop_strength", _HOP_GRID),),
        outputs=("b1", "b2", "b3", "b4"),
        name="fig6a",
    )
    presets["fig6b"] = SweepSpec(
        base=chain,
        axes=(SweepAxis("hop_phase[0]", _PHASE_GRID),),
        outputs=("b1", "b2", "b3", "b4"),
        name="fig6b",
    )
    for label, eta, theta in (("dmu", 0.0, 0.0), ("dmb", 0.1, 0.5 * _PI)):
        presets[f"fig6c_{label}"] = SweepSpec(
            base=_four_mode_base(eta=eta, theta=theta),
            axes=(SweepAxis("opa_gain", _GAIN_GRID),),
            outputs=("b1", "b2", "b3", "b4"),
            name=f"fig6c_{label}",
        )
        presets[f"fig6d_{label}"] = SweepSpec(
            base=_four_mode_base(eta=eta, theta=theta),
            axes=(SweepAxis("opa_phase", _PHASE_GRID),),
            outputs=("b1", "b2", "b3", "b4"),
            name=f"fig6d_{label}",
        )
    return presets


_PRESETS = _build_presets()

PRESET_GROUPS: dict[str, tuple[str, ...]] = {
    "fig2": ("fig2a", "fig2b"),
    "fig3": ("fig3a", "fig3b", "fig3c", "fig3d"),
    "fig4": ("fig4a", "fig4b", "fig4c", "fig4d"),
    "fig5a": ("fig5a_dmu", "fig5a_dmb"),
    "fig5b": ("fig5b_dmu", "fig5b_dmb"),
    "fig5": ("fig5a_dmu", "fig5a_dmb", "fig5b_dmu", "fig5b_dmb"),
    "fig6c": ("fig6c_dmu", "fig6c_dmb"),
    "fig6d": ("fig6d_dmu", "fig6d_dmb"),
    "fig6": ("fig6a", "fig6b", "fig6c_dmu", "fig6c_dmb", "fig6d_dmu", "fig6d_dmb"),
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def figure_preset(name: str) -> SweepSpec:
    """Sweep spec with the exact caption parameters of a published panel.

    Concrete names (``fig2a`` ... ``fig6d_dmb``) return a single spec;
    umbrella names (``fig5``) must be resolved through
    ``resolve_preset_names`` first.
    """
    try:
        return _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown figure preset {name!r}; known presets: "
            + ", ".join(sorted(set(_PRESETS) | set(PRESET_GROUPS)))
        ) from None


def resolve_preset_names(name: str) -> tuple[str, ...]:
    """Expand an umbrella preset name to its concrete variants."""
    if name in _PRESETS:
        return (name,)
    if name in PRESET_GROUPS:
        return PRESET_GROUPS[name]
    raise ConfigError(
        f"unknown figure preset {name!r}; known presets: "
        + ", ".join(sorted(set(_PRESETS) | set(PRESET_GROUPS)))
    )
