"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict
from pathlib import Path

from lfsim import estimator, ewfs, io, lfpoly, spacetime
from lfsim.behavior import chsh_values, max_chsh
from lfsim.io import ConfigError

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
FORMATS = ("json", "csv", "text")

EWFS_RUN_KEYS = {"n_trials", "p_min", "p_max", "p_step", "p_grid"}
ESTIMATE_RUN_KEYS = {"sweep_parameter", "sweep_grid"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser, default_format: str = "text") -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--preset", help="named preset, e.g. paper-defaults")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="repeatable")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=FORMATS, default=default_format)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lfsim", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = groups.add_parser("ewfs", help="simulate the friend protocol")
    sub = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("run", "sweep-noise", "montecarlo"):
        _common(sub.add_parser(name))

    g = groups.add_parser("lf", help="Local Friendliness feasibility")
    sub = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = sub.add_parser("check")
    p.add_argument("behavior", help="behavior file (.csv with header x,y,a,b,p, or .json)")
    _common(p)
    _common(sub.add_parser("vertices"), "csv")

    g = groups.add_parser("spacetime", help="light-cone checks of the protocol schedule")
    sub = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = sub.add_parser("validate")
    p.add_argument("schedule", nargs="?", help="schedule JSON; canonical schedule if omitted")
    _common(p)
    _common(sub.add_parser("minsep"))

    g = groups.add_parser("estimate", help="fault-tolerant resource estimate")
    sub = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    _common(sub.add_parser("report"))
    _common(sub.add_parser("sweep"), "csv")
    return parser


def _section(args, name: str) -> dict:
    """Preset section, then config file, then overrides."""
    cfg: dict = {}
    if args.preset:
        cfg.update(io.load_preset(args.preset).get(name, {}))
    if args.config:
        loaded = io.load_json(args.config)
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        cfg.update(loaded[name] if name in loaded else loaded)
    cfg.update(_overrides(args))
    return cfg


def _overrides(args) -> dict:
    return dict(io.parse_override(text) for text in args.override)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _split(cfg: dict, keys: set[str]) -> tuple[dict, dict]:
    return {k: v for k, v in cfg.items() if k not in keys}, {k: cfg[k] for k in keys if k in cfg}


# --------------------------------------------------------------------- ewfs


def cmd_ewfs(args) -> int:
    cfg, run = _split(_section(args, "ewfs"), EWFS_RUN_KEYS)
    config = io.scenario_from_dict(cfg)
    if args.action == "run":
        bh = ewfs.behavior(config)
        variant, s = max_chsh(bh)
        cert = lfpoly.lf_feasible(bh)
        if args.format == "csv":
            _emit(args, io.behavior_to_csv(bh))
        elif args.format == "json":
            out = io.behavior_to_json(bh)
            out.update(chsh={str(k): v for k, v in chsh_values(bh).items()},
                       max_chsh={"variant": variant, "value": s}, lf_feasible=cert.feasible)
            _emit(args, io.dumps(out))
        else:
            lines = [f"x={x} y={y} a={a:+d} b={b:+d}  p={p:.12f}" for x, y, a, b, p in bh.rows()]
            lines.append(f"CHSH (variant {variant}) = {s:.12f}")
            lines.append("LF feasible" if cert.feasible else "LF infeasible")
            _emit(args, "\n".join(lines) + "\n")
        return EXIT_OK

    if args.action == "sweep-noise":
        if "p_grid" in run:
            grid = [float(p) for p in run["p_grid"]]
        else:
            lo, hi, step = (float(run.get(k, d)) for k, d in (("p_min", 0.0), ("p_max", 0.4), ("p_step", 0.05)))
            if step <= 0 or hi < lo:
                raise ConfigError("noise grid needs p_step > 0 and p_max >= p_min")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            grid = [round(lo + i * step, 12) for i in range(n)]
        rows = [asdict(r) for r in ewfs.noise_sweep(config, grid)]
        if args.format == "json":
            _emit(args, io.dumps({"noise_point": config.noise_point, "rows": rows}))
        elif args.format == "csv":
            _emit(args, io.rows_to_csv(rows))
        else:
            text = "".join(f"p_dep={r['p_dep']:.4f}  CHSH={r['chsh']:.6f}  "
                           f"{'LF feasible' if r['lf_feasible'] else 'LF infeasible'}\n" for r in rows)
            _emit(args, text)
        return EXIT_OK

    n_trials = int(run.get("n_trials", 10**6))
    seed = args.seed if args.seed is not None else 0
    res = ewfs.monte_carlo(config, n_trials, seed)
    s, se = res.chsh(max_chsh(ewfs.behavior(config))[0])
    if args.format == "csv":
        _emit(args, io.behavior_to_csv(res.behavior))
    elif args.format == "json":
        out = io.behavior_to_json(res.behavior)
        out.update(seed=seed, n_trials=n_trials, n_kept=res.n_kept, chsh=s, chsh_standard_error=se,
                   counts=res.counts.tolist())
        _emit(args, io.dumps(out))
    else:
        _emit(args, f"trials={n_trials} kept={res.n_kept} seed={seed}\nCHSH = {s:.6f} +- {se:.6f}\n")
    return EXIT_OK


# ----------------------------------------------------------------------- lf


def cmd_lf(args) -> int:
    if args.action == "vertices":
        verts = lfpoly.enumerate_lf_vertices()
        if args.format == "json":
            _emit(args, io.dumps({"vertices": [io.behavior_to_json(v)["rows"] for v in verts]}))
        else:
            rows = [dict(vertex=i, x=x, y=y, a=a, b=b, p=p)
                    for i, v in enumerate(verts) for x, y, a, b, p in v.rows()]
            _emit(args, io.rows_to_csv(rows))
        return EXIT_OK

    bh = io.load_behavior(args.behavior)
    try:
        cert = lfpoly.lf_feasible(bh)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.format == "json":
        _emit(args, io.dumps(io.certificate_to_dict(cert)))
    elif args.format == "csv":
        rows = [dict(variant=v, chsh=s, violated=bad) for v, s, bad in lfpoly.chsh_facets_check(bh)]
        _emit(args, io.rows_to_csv(rows))
    elif cert.feasible:
        w = cert.weights
        _emit(args, f"feasible, weights P(c=+1)={w[0]:.6f} P(c=-1)={w[1]:.6f}\n")
    else:
        variant, value = cert.violated_facet
        _emit(args, f"infeasible, CHSH={value:.3f} > 2 (variant {variant})\n")
    return EXIT_OK


# ---------------------------------------------------------------- spacetime


def _canonical_from(cfg: dict) -> tuple[float, float, spacetime.Timings]:
    unknown = set(cfg) - {"T", "bob_offset", "timings"}
    if unknown:
        raise ConfigError(f"unknown spacetime keys: {', '.join(sorted(unknown))}")
    timings = io.timings_from_dict(cfg.get("timings", {}))
    try:
        return float(cfg.get("T", 1.0)), float(cfg.get("bob_offset", 2.0)), timings
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_spacetime(args) -> int:
    cfg = _section(args, "spacetime")
    if args.action == "validate":
        if args.schedule:
            schedule = io.schedule_from_json(io.load_json(args.schedule))
            overrides = _overrides(args)
            if set(overrides) - {"bob_offset"}:
                raise ConfigError("a schedule file accepts only the bob_offset override")
            if "bob_offset" in overrides:
                schedule = schedule.with_bob_offset(float(overrides["bob_offset"]))
        else:
            T, offset, timings = _canonical_from(cfg)
            schedule = spacetime.canonical_schedule(T, offset, timings)
        try:
            report = spacetime.validate_schedule(schedule)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if args.format == "json":
            _emit(args, io.dumps({"passed": report.passed, "conditions": report.conditions,
                                  "failures": report.failures, "schedule": io.schedule_to_json(schedule)}))
        elif args.format == "csv":
            rows = [dict(condition=k, passed=report.conditions[k], description=spacetime.CONDITION_TEXT[k])
                    for k in spacetime.CONDITIONS]
            _emit(args, io.rows_to_csv(rows))
        else:
            _emit(args, report.text() + "\n")
        return EXIT_OK

    T, _, timings = _canonical_from(cfg)
    res = spacetime.min_bob_separation(T, timings)
    if args.format == "json":
        _emit(args, io.dumps({"T_seconds": T, "min_bob_separation_light_seconds": res.overall,
                              "branches_light_seconds": res.branches, "binding": res.binding}))
    elif args.format == "csv":
        rows = [dict(branch=b, min_separation_light_seconds=v) for b, v in res.branches.items()]
        rows.append(dict(branch="overall", min_separation_light_seconds=res.overall))
        _emit(args, io.rows_to_csv(rows))
    else:
        lines = [f"T = {T:g} s", f"minimum Bob separation: {res.overall:.6g} light-seconds (bound set by {res.binding['overall']})"]
        lines += [f"  branch {b}: {v:.6g} light-seconds" for b, v in res.branches.items()]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# ----------------------------------------------------------------- estimate


def _report_text(rep: estimator.FullReport) -> str:
    keys = ("gamma", "delta", "t_seg", "g_seg", "s_R", "s_I", "q_route", "s_L", "t_L", "err_locations",
            "p_L_target", "r_exponent", "code_distance", "tau_ltof", "T_Q", "time_ratio",
            "factory_qubits_each", "factory_qubits_total", "data_physical_qubits")
    ex, dc = asdict(rep.exact), asdict(rep.decade)
    lines = [f"{'quantity':<22}{'exact chain':>16}{'decade-rounded':>18}"]
    for k in keys:
        unit = estimator.UNITS.get(k, "")
        name = f"{k} [{unit}]" if unit else k
        lines.append(f"{name:<22}{ex[k]:>16.6g}{dc[k]:>18.6g}")
    lines.append(f"closed-form T_Q/T: {rep.closed_form_time_ratio:.6g} (d = {rep.closed_form_distance})")
    lines += [f"warning: {w}" for w in rep.warnings]
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    cfg, run = _split(_section(args, "estimator"), ESTIMATE_RUN_KEYS)
    inputs = io.estimator_from_dict(cfg)
    if args.action == "report":
        rep = estimator.full_report(inputs)
        for w in rep.warnings:
            print(f"warning: {w}", file=sys.stderr)
        if args.format == "json":
            _emit(args, io.dumps(rep.to_dict()))
        elif args.format == "csv":
            ex, dc = rep.exact.to_dict(), rep.decade.to_dict()
            rows = [dict(field=k, exact=ex[k], decade_rounded=dc[k]) for k in ex if k not in ("warnings", "rounding")]
            _emit(args, io.rows_to_csv(rows))
        else:
            _emit(args, _report_text(rep))
        return EXIT_OK

    parameter = run.get("sweep_parameter")
    grid = run.get("sweep_grid")
    if not parameter or not isinstance(grid, list) or not grid:
        raise ConfigError("sweep needs 'sweep_parameter' and a non-empty 'sweep_grid' list")
    res = estimator.sweep(inputs, str(parameter), grid)
    rows = res.rows("exact")
    if res.monotone is False:
        print(f"warning: T_Q is not monotone in {parameter}", file=sys.stderr)
    if args.format == "json":
        _emit(args, io.dumps({"parameter": parameter, "monotone": res.monotone, "rows": rows,
                              "decade_rounded_rows": res.rows("decade")}))
    elif args.format == "csv":
        _emit(args, io.rows_to_csv(rows))
    else:
        lines = [f"{parameter:>14}  {'d':>4}  {'tau_ltof [s]':>14}  {'T_Q [s]':>14}"]
        lines += [f"{r[parameter]:>14.6g}  {r['code_distance']:>4d}  {r['tau_ltof_seconds']:>14.6g}  {r['T_Q_seconds']:>14.6g}"
                  for r in rows]
        lines.append(f"monotone: {res.monotone}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {"ewfs": cmd_ewfs, "lf": cmd_lf, "spacetime": cmd_spacetime, "estimate": cmd_estimate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.group](args)
    except ConfigError as exc:
        print(f"lfsim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (estimator.EstimatorError, spacetime.InfeasibleScheduleError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"lfsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
