"""Command-line front end.

Subcommands
-----------
simulate      one steady-state solve: variances, squeezing, cooperativity,
              dark-mode census
sweep         run the [sweep] section of a config file
figure        run a named figure preset and write its CSV
stability     eigenvalue (and, for small systems, Routh-Hurwitz) verdict
normal-modes  mechanical normal-mode frequencies and effective couplings

Exit codes: 0 success, 1 unusable input (parse/validation/unknown preset),
2 valid configuration whose steady state does not exist (unstable system).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .analysis import (
    dark_mode_census,
    mechanical_normal_modes,
    squeezing_report,
)
from .configio import load_sweep_spec, load_system_config, parse_override, set_param
from .errors import ConfigError, ThresholdError, UnstableSystemError
from .model import build_drift_matrix, build_noise_matrix, mode_labels, validate_config
from .steady_state import ROUTH_MAX_DIM, is_stable, routh_hurwitz_check, solve_lyapunov
from .sweep import (
    SweepSpec,
    csv_text,
    figure_preset,
    resolve_preset_names,
    rows_as_dicts,
    run_sweep,
)


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1; code 2 is reserved for "valid but unstable"
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(p: argparse.ArgumentParser, with_config: bool = True) -> None:
    if with_config:
        p.add_argument("--config", required=True, help="TOML or JSON config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override a parameter (repeatable), e.g. hopping[0].phase=0",
        )
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--quiet", action="store_true", help="suppress advisories and summaries")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmsq", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"dmsq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single steady-state squeezing report")
    _add_common(p)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the [sweep] section of a config file")
    _add_common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="run a figure preset")
    p.add_argument("name", help="preset name, e.g. fig2a, fig4c, fig5, fig6a")
    _add_common(p, with_config=False)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("stability", help="eigenvalue stability report")
    _add_common(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("normal-modes", help="mechanical normal-mode report")
    _add_common(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_normal_modes)
    return parser


def _load_config(args):
    cfg = load_system_config(args.config)
    for text in args.overrides:
        path, value = parse_override(text)
        cfg = set_param(cfg, path, value)
    checked = validate_config(cfg)
    if checked.advisories and not args.quiet:
        for a in checked.advisories:
            print(f"advisory: {a}", file=sys.stderr)
    return checked


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _census_or_none(cfg) -> list[int] | None:
    if max(cfg.coupling, default=0.0) == 0.0:
        return None
    return dark_mode_census(mechanical_normal_modes(cfg))


def cmd_simulate(args) -> int:
    checked = _load_config(args)
    a = build_drift_matrix(checked)
    q = build_noise_matrix(checked)
    stab = is_stable(a)
    census = _census_or_none(checked.config)

    report = None
    if stab.stable:
        v = solve_lyapunov(a, q)
        report = squeezing_report(checked, v, stab)

    if args.format == "json":
        payload = {
            "stable": stab.stable,
            "margin": stab.margin,
            "advisories": list(checked.advisories),
            "dark_modes": census,
            "modes": report.as_dict()["modes"] if report else None,
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    elif args.format == "csv":
        labels = mode_labels(checked.n_mech)
        cols = ["stable"]
        for m in labels:
            cols += [f"S_X_{m}", f"S_Y_{m}", f"var_X_{m}", f"var_Y_{m}"]
        cells = ["true" if stab.stable else "false"]
        for m in labels:
            if report is None:
                cells += ["", "", "", ""]
            else:
                mr = report.mode(m)
                cells += [f"{x:.12g}" for x in (mr.s_x_db, mr.s_y_db, mr.var_x, mr.var_y)]
        _emit(",".join(cols) + "\n" + ",".join(cells) + "\n", args)
    else:
        lines = [f"stable: {'yes' if stab.stable else 'NO'} (margin = {stab.margin:.6g})"]
        if census is None:
            lines.append("dark modes: undefined (no optomechanical coupling)")
        elif census:
            lines.append(f"dark modes: {census} (squeezing transfer blocked)")
        else:
            lines.append("dark modes: none (dark-mode-broken regime)")
        if report is not None:
            lines.append(f"{'mode':>6} {'var_X':>12} {'var_Y':>12} {'S_X[dB]':>10} {'S_Y[dB]':>10} {'C':>10}")
            for m in report.modes:
                coop = f"{m.cooperativity:.6g}" if m.cooperativity is not None else "-"
                lines.append(
                    f"{m.mode:>6} {m.var_x:12.6g} {m.var_y:12.6g} "
                    f"{m.s_x_db:10.4f} {m.s_y_db:10.4f} {coop:>10}"
                )
        else:
            lines.append("no steady state: system is unstable, covariance diverges")
        _emit("\n".join(lines) + "\n", args)
    return 0 if stab.stable else 2


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.config)
    base = spec.base
    for text in args.overrides:
        path, value = parse_override(text)
        base = set_param(base, path, value)
    spec = SweepSpec(base=base, axes=spec.axes, outputs=spec.outputs, name=spec.name)
    result = run_sweep(spec)
    if args.format == "json":
        payload = {"metadata": result.metadata, "rows": rows_as_dicts(result)}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        _emit(csv_text(result), args)
    return 0


def _summarize(result, file=sys.stderr) -> None:
    axis = result.spec.axes[0].path
    xs = result.column(axis)
    for col in result.columns:
        if not col.startswith("S_"):
            continue
        vals = result.column(col)
        pairs = [(v, x) for v, x in zip(vals, xs) if v is not None]
        if not pairs:
            continue
        best, at = max(pairs)
        msg = f"  {col}: max {best:.4f} dB at {axis} = {at:.6g}"
        crossings = []
        for (v1, x1), (v2, x2) in zip(pairs, pairs[1:]):
            if v1 == 0.0:
                crossings.append(x1)
            elif (v1 > 0) != (v2 > 0):
                crossings.append(x1 - v1 * (x2 - x1) / (v2 - v1))
        if crossings:
            msg += "; zero crossings near " + ", ".join(f"{c:.4g}" for c in crossings)
        print(msg, file=file)


def cmd_figure(args) -> int:
    names = resolve_preset_names(args.name)
    multi = len(names) > 1
    for name in names:
        result = run_sweep(figure_preset(name))
        if args.out:
            out = Path(args.out)
            dest = out.with_name(f"{out.stem}_{name}{out.suffix}") if multi else out
        else:
            dest = Path(f"{name}.{args.format}")
        if args.format == "json":
            payload = {"metadata": result.metadata, "rows": rows_as_dicts(result)}
            dest.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        else:
            dest.write_text(csv_text(result), encoding="utf-8")
        if not args.quiet:
            print(f"{name}: wrote {dest}", file=sys.stderr)
            _summarize(result)
    return 0


def cmd_stability(args) -> int:
    checked = _load_config(args)
    a = build_drift_matrix(checked)
    stab = is_stable(a)
    routh = routh_hurwitz_check(a) if a.dim <= ROUTH_MAX_DIM else None
    order = np.argsort(-stab.eigenvalues.real)
    ev = stab.eigenvalues[order]
    if args.format == "json":
        payload = {
            "stable": stab.stable,
            "margin": stab.margin,
            "routh_hurwitz": routh,
            "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in ev],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        lines = [
            f"verdict: {'stable' if stab.stable else 'UNSTABLE'}",
            f"margin (max Re): {stab.margin:.6g}",
        ]
        if routh is not None:
            lines.append(f"Routh-Hurwitz: {'stable' if routh else 'unstable'}")
        lines.append("eigenvalues (by real part):")
        for z in ev:
            lines.append(f"  {z.real:+.6e} {z.imag:+.6e}i")
        _emit("\n".join(lines) + "\n", args)
    return 0 if stab.stable else 2


def cmd_normal_modes(args) -> int:
    checked = _load_config(args)
    decomp = mechanical_normal_modes(checked)
    census = _census_or_none(checked.config)
    if args.format == "json":
        payload = {
            "frequencies": [float(x) for x in decomp.frequencies],
            "coupling_magnitudes": [float(abs(c)) for c in decomp.couplings],
            "dark": list(decomp.dark) if decomp.dark is not None else None,
            "dark_modes": census,
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        lines = [f"{'mode':>5} {'frequency':>14} {'|G~|':>14} {'dark':>6}"]
        for j, (f, c) in enumerate(zip(decomp.frequencies, decomp.couplings)):
            flag = "-" if decomp.dark is None else ("yes" if decomp.dark[j] else "no")
            lines.append(f"{j:>5} {f:14.8g} {abs(c):14.8g} {flag:>6}")
        if census is None:
            lines.append("dark-mode census: undefined (no optomechanical coupling)")
        else:
            lines.append(f"dark-mode census: {census if census else 'none (all dark modes broken)'}")
        _emit("\n".join(lines) + "\n", args)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ThresholdError, UnstableSystemError, OSError) as exc:
        print(f"dmsq: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
