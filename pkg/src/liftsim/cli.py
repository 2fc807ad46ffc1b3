"""Command-line front end.

Verbs:
    run        simulate every configured (scenario, controller) pair
    compare    same, plus percentage deltas against a baseline controller
    tune       tune the admittance time constant across patient masses
    scenarios  list built-in scenario and controller presets
    validate   check a config file against the schema and exit

Exit codes: 0 ok, 1 self-check failure, 2 config error, 3 simulation diverged.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .config import ConfigError, build_runs, load_config
from .controllers import presets
from .dynamics import SimulationDiverged
from .harness import DEFAULT_TUNE_MASSES, execute_runs, seedless_check, tune_report
from .report import compare_csv, format_number, series_csv, summary_csv, write_text
from .version import TOOL_VERSION
from .virtual_user import scenario_library

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftsim",
        description="Simulate and compare motorized lift-assistance controllers.")
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--series", action="store_true",
                       help="also write per-run time-series CSVs")
        p.add_argument("--plots", action="store_true",
                       help="also render PNG figures next to the CSVs")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes")
        p.add_argument("--seedless-check", action="store_true",
                       help="run the grid twice and verify byte-identical output")

    p_run = sub.add_parser("run", help="simulate the configured runs")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="simulate and compare against a baseline")
    common(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_tune = sub.add_parser("tune", help="tune the admittance time constant")
    p_tune.add_argument("--config", required=True)
    p_tune.add_argument("--out", default="out")
    p_tune.set_defaults(func=_cmd_tune)

    p_scn = sub.add_parser("scenarios", help="list scenario and controller presets")
    p_scn.set_defaults(func=_cmd_scenarios)

    p_val = sub.add_parser("validate", help="validate a config file only")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def _output_options(args, config) -> tuple[bool, bool]:
    out_cfg = config.get("output", {})
    series = args.series or out_cfg.get("series", False)
    plots = args.plots or out_cfg.get("plots", False)
    return series, plots


def _write_run_outputs(results, specs, out_dir: Path, series: bool,
                       plots: bool) -> None:
    if series:
        by_name = {(s.scenario_name, s.controller_name): s for s in specs}
        for result in results:
            spec = by_name[(result.scenario, result.controller)]
            write_text(out_dir / "series" /
                       f"{result.scenario}__{result.controller}.csv",
                       series_csv(result, spec.scenario))
    if plots:
        from . import plots as plotmod
        by_name = {(s.scenario_name, s.controller_name): s for s in specs}
        for result in results:
            spec = by_name[(result.scenario, result.controller)]
            plotmod.render_series_figure(
                result, spec.scenario,
                out_dir / "plots" / f"{result.scenario}__{result.controller}.png")
        plotmod.render_compare_figure(results, out_dir / "plots" / "compare.png")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    specs = build_runs(config)
    if args.seedless_check:
        ok, message = seedless_check(specs)
        print(message)
        if not ok:
            return 1
    series, plots = _output_options(args, config)
    results = execute_runs(specs, jobs=args.jobs,
                           keep_series=series or plots)
    out_dir = Path(args.out)
    write_text(out_dir / "summary.csv", summary_csv(results))
    _write_run_outputs(results, specs, out_dir, series, plots)
    print(f"wrote {len(results)} run(s) to {out_dir / 'summary.csv'}")
    return 0


def _cmd_compare(args) -> int:
    config = load_config(args.config)
    specs = build_runs(config)
    controllers = {spec.controller_name for spec in specs}
    if len(controllers) < 2:
        raise ConfigError("compare needs at least two controllers on a shared scenario")
    baseline = config.get("baseline", "no_assist")
    if baseline not in controllers:
        raise ConfigError(f"baseline {baseline!r} is not among the controllers")
    if args.seedless_check:
        ok, message = seedless_check(specs, baseline=baseline)
        print(message)
        if not ok:
            return 1
    series, plots = _output_options(args, config)
    results = execute_runs(specs, jobs=args.jobs, keep_series=series or plots)
    out_dir = Path(args.out)
    write_text(out_dir / "compare.csv", compare_csv(results, baseline))
    _write_run_outputs(results, specs, out_dir, series, plots)
    print(f"wrote {len(results)} run(s) to {out_dir / 'compare.csv'}")
    return 0


def _cmd_tune(args) -> int:
    config = load_config(args.config)
    tune_cfg = config.get("tune", {})
    report = tune_report(
        masses=tuple(tune_cfg.get("masses", DEFAULT_TUNE_MASSES)),
        b0=tune_cfg.get("b0", 37.5),
        comfort_limit=tune_cfg.get("comfort_limit", 0.315),
        duration=tune_cfg.get("duration", 20.0),
        tau_lo=tune_cfg.get("tau_lo", 0.05),
        tau_hi=tune_cfg.get("tau_hi", 10.0))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("mass", "tau", "feasible", "a_w_at_tau_max",
                     "binding_a_w", "binding_pass"))
    verify = {row["mass"]: row for row in report["verification"]}
    for row in report["rows"]:
        check = verify.get(row["mass"])
        writer.writerow((
            format_number(row["mass"]),
            format_number(row["tau"]) if row["tau"] is not None else "",
            "true" if row["feasible"] else "false",
            format_number(row["a_w_at_max"]) if row["a_w_at_max"] is not None else "",
            format_number(check["a_w"]) if check else "",
            ("true" if check["pass"] else "false") if check else ""))
    out_dir = Path(args.out)
    write_text(out_dir / "tune.csv", buf.getvalue())

    if report["binding_tau"] is not None:
        print(f"binding tau = {report['binding_tau']:.3f} s"
              f" (comfort limit {report['comfort_limit']} m/s^2)")
    else:
        print("no feasible tau for any configured mass")
    if report["monotone_warning"]:
        print(f"warning: {report['monotone_warning']}", file=sys.stderr)
    print(f"wrote {out_dir / 'tune.csv'}")
    return 0


def _cmd_scenarios(args) -> int:
    print("scenario presets:")
    for name, scenario in scenario_library().items():
        ref = scenario.reference
        print(f"  {name:<16} M_p={scenario.patient_mass:g} kg,"
              f" {ref.kind} reference, {scenario.duration:g} s")
    print("controller presets:")
    for name in presets():
        print(f"  {name}")
    print("  friction_comp (explicit configuration only)")
    return 0


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    build_runs(config) if "scenarios" in config and "controllers" in config else None
    print(f"{args.config}: valid (schema_version {config['schema_version']})")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SimulationDiverged as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
