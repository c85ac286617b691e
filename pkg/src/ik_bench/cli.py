"""Command-line front end: validate scenarios, run/compare experiments, plot.

Exit codes: 0 success, 1 invariant failure (or mismatched inputs),
2 unreadable/malformed input, 3 solver or divergence failure during a run.
"""

from __future__ import annotations

import argparse
import importlib.resources
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .errors import ParseError, SolverError, TrackingError, ValidationError
from .reportio import load_report, write_json, write_report, atomic_write_text
from .scenario import load_scenario, validation_checks
from .svgplot import histogram, line_chart
from .tracking import compare_runs, run_tracking

log = logging.getLogger("ik_bench")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3


def resolve_scenario(arg: str) -> str:
    """Accept a filesystem path or the bare name of a packaged scenario."""
    if os.path.exists(arg):
        return arg
    name = arg if arg.endswith(".json") else f"{arg}.json"
    candidate = importlib.resources.files("ik_bench") / "data" / name
    if candidate.is_file():
        return str(candidate)
    raise FileNotFoundError(f"scenario {arg!r}: no such file or packaged scenario")


_TABLE_ROWS = (
    ("Avg. manipulability", "avg_manipulability", 1.0, "{:.4f}"),
    ("Max. manipulability", "max_manipulability", 1.0, "{:.4f}"),
    ("Avg. RCM error (mm)", "avg_rcm_error_m", 1e3, "{:.5f}"),
    ("Avg. EE pose error", "avg_pose_error", 1.0, "{:.3e}"),
    ("Mean solve time (ms)", "mean_solve_time_s", 1e3, "{:.3f}"),
    ("Max solve time (ms)", "max_solve_time_s", 1e3, "{:.3f}"),
)


def _print_aggregates(aggregates: dict) -> None:
    for label, key, scale, fmt in _TABLE_ROWS:
        print(f"  {label:<24} {fmt.format(aggregates[key] * scale)}")


def _print_comparison(summary) -> None:
    print(f"  {'':<24} {'without opt':>14} {'with opt':>14} {'change':>10}")
    for label, key, scale, fmt in _TABLE_ROWS:
        off = fmt.format(summary.aggregates_off[key] * scale)
        on = fmt.format(summary.aggregates_on[key] * scale)
        delta = summary.deltas_pct[key]
        delta_s = "n/a" if delta is None else f"{delta:+.1f}%"
        print(f"  {label:<24} {off:>14} {on:>14} {delta_s:>10}")


def cmd_validate(args) -> int:
    try:
        path = resolve_scenario(args.scenario)
        checks, _ = validation_checks(path, args.override)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    ok = True
    for name, passed, message in checks:
        status = "ok" if passed else "FAIL"
        suffix = f" ({message})" if message else ""
        print(f"[{status:>4}] {name}{suffix}")
        ok &= passed
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_run(args) -> int:
    try:
        config = load_scenario(resolve_scenario(args.scenario), args.override)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    try:
        report = run_tracking(config)
    except (TrackingError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    paths = write_report(report, args.out, config.name)
    log.info("wrote %s and %s", paths["json"], paths["csv"])
    print(f"{config.name} ({config.mode}, optimization "
          f"{'on' if config.optimize_manipulability else 'off'})")
    _print_aggregates(report.aggregates)
    for warning in report.warnings:
        print(f"  warning: {warning}")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        base = load_scenario(resolve_scenario(args.scenario), args.override)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    threads = int(os.environ.get("IK_BENCH_THREADS", "1") or "1")
    config_on = base.with_optimization(True)
    config_off = base.with_optimization(False)
    try:
        if threads >= 2:
            with ThreadPoolExecutor(max_workers=2) as pool:
                fut_on = pool.submit(run_tracking, config_on)
                fut_off = pool.submit(run_tracking, config_off)
                report_on, report_off = fut_on.result(), fut_off.result()
        else:
            report_on = run_tracking(config_on)
            report_off = run_tracking(config_off)
    except (TrackingError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    summary = compare_runs(report_on, report_off)
    write_report(report_on, args.out, f"{base.name}_on")
    write_report(report_off, args.out, f"{base.name}_off")
    write_json(os.path.join(args.out, f"{base.name}_compare.json"), summary.to_dict())
    print(f"{base.name} ({base.mode})")
    _print_comparison(summary)
    return EXIT_OK


def cmd_plot(args) -> int:
    if not 1 <= len(args.report) <= 2:
        print("error: plot takes one or two --report files", file=sys.stderr)
        return EXIT_PARSE
    try:
        reports = [load_report(p) for p in args.report]
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if len(reports) == 2 and reports[0].scenario != reports[1].scenario:
        print("error: mismatched scenario fingerprints", file=sys.stderr)
        return EXIT_INVARIANT

    def label(r):
        return "optimization on" if r.optimize_manipulability else "optimization off"

    try:
        m_svg = line_chart(
            [(label(r), r.series["step"], r.series["m"]) for r in reports],
            "Manipulability along the path", "step", "manipulability index",
        )
        rcm_svg = line_chart(
            [
                (label(r), r.series["step"],
                 [v * 1e3 for v in r.series["e_rcm_norm"]])
                for r in reports
            ],
            "Incision-point error along the path", "step", "RCM error (mm)",
        )
        time_svg = histogram(
            [
                (label(r), [v * 1e3 for v in r.series["solve_time_s"]])
                for r in reports
            ],
            30, "Per-cycle solve time", "solve time (ms)", "cycles",
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    outputs = {
        "manipulability_vs_step.svg": m_svg,
        "rcm_error_vs_step.svg": rcm_svg,
        "solve_time_hist.svg": time_svg,
    }
    for name, svg in outputs.items():
        atomic_write_text(os.path.join(args.out, name), svg)
        print(f"wrote {os.path.join(args.out, name)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ik-bench",
        description="Constrained-IK tracking benchmark: run, compare, validate, plot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_opts(p):
        p.add_argument("-v", "--verbose", action="count", default=0,
                       help="increase log verbosity")

    def add_scenario_opts(p):
        add_common_opts(p)
        p.add_argument("--scenario", required=True,
                       help="scenario file path or packaged scenario name")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="override a scenario field")

    p_run = sub.add_parser("run", help="run one scenario, write report JSON + CSV")
    add_scenario_opts(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run with optimization on and off")
    add_scenario_opts(p_cmp)
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check scenario and chain invariants")
    add_scenario_opts(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_plot = sub.add_parser("plot", help="emit SVG charts from report files")
    add_common_opts(p_plot)
    p_plot.add_argument("--report", action="append", default=[], required=True,
                        help="report JSON (repeat for an on/off overlay)")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
