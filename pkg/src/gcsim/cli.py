"""Command-line entry points: serve, script, score, analyze.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import flightlog
from .runtime import run_script
from .scenario import (
    ScenarioError,
    ScriptError,
    load_plan_file,
    load_scenario_file,
    load_score_config,
    load_script_file,
    save_plan,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcsim",
                     description="UAV ground-control simulation suite")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    serve = sub.add_parser("serve", help="run the simulation server")
    serve.add_argument("--scenario", required=True, help="scenario YAML file")
    serve.add_argument("--realtime", action="store_true",
                       help="pace the simulation to wall-clock time "
                            "(default: as fast as possible)")
    serve.add_argument("--listen", default=None, metavar="HOST:PORT",
                       help="override the scenario's listen address")
    serve.add_argument("--log-dir", default=None,
                       help="write one log file per flight session here")
    serve.add_argument("--frontend", default=None,
                       help="serve a static UI bundle from this directory")

    script = sub.add_parser("script", help="headless deterministic scripted run")
    script.add_argument("--scenario", required=True)
    script.add_argument("--script", required=True, help="pilot script YAML file")
    script.add_argument("--out", required=True, help="log CSV output path")
    script.add_argument("--plan-out", default=None,
                        help="also write the uploaded mission plan as YAML")

    score = sub.add_parser("score", help="score flight logs against a plan")
    score.add_argument("--plan", required=True, help="mission plan YAML file")
    score.add_argument("--config", default=None, help="score config YAML file")
    score.add_argument("logs", nargs="+", help="flight log CSV files")

    analyze = sub.add_parser("analyze", help="emit plot data for a flight log")
    analyze.add_argument("log", help="flight log CSV file")
    analyze.add_argument("--spacing-m", type=float, default=1.0)
    analyze.add_argument("--turn-deg", type=float, default=20.0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "serve": _cmd_serve,
        "script": _cmd_script,
        "score": _cmd_score,
        "analyze": _cmd_analyze,
    }[args.command]
    return handler(args)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        scenario = load_scenario_file(args.scenario)
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    host, port = scenario.listen_host, scenario.listen_port
    if args.listen:
        try:
            host, port_text = args.listen.rsplit(":", 1)
            port = int(port_text)
        except ValueError:
            print(f"bad --listen address: {args.listen!r}", file=sys.stderr)
            return EXIT_USAGE

    app = create_app(scenario, realtime=args.realtime, log_dir=args.log_dir,
                     frontend_dir=args.frontend)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except SystemExit as exc:
        return EXIT_RUNTIME if exc.code else EXIT_OK
    except OSError as exc:
        print(f"server failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_script(args) -> int:
    try:
        scenario = load_scenario_file(args.scenario)
        script = load_script_file(args.script)
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ScenarioError, ScriptError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    result = run_script(scenario, script)
    for t, ack in result.error_acks:
        print(f"t={t:.2f}s: command 0x{ack.ref_tag:02x} rejected: {ack.code.name}",
              file=sys.stderr)
    try:
        Path(args.out).write_text(flightlog.write_log(result.records))
        if args.plan_out:
            if result.plan is None:
                print("no mission plan was uploaded; skipping --plan-out",
                      file=sys.stderr)
            else:
                Path(args.plan_out).write_text(save_plan(result.plan))
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(result.records)} records to {args.out}")
    return EXIT_OK


def _cmd_score(args) -> int:
    try:
        plan = load_plan_file(args.plan)
        config = (load_score_config(Path(args.config).read_text())
                  if args.config else flightlog.ScoreConfig())
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ScenarioError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    loaded: list[tuple[str, list[flightlog.LogRecord]]] = []
    for path in args.logs:
        try:
            loaded.append((path, flightlog.read_log(Path(path).read_text())))
        except OSError as exc:
            print(f"{path}: cannot read: {exc}", file=sys.stderr)
        except ValueError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
    if not loaded:
        return EXIT_RUNTIME

    cohort = [flightlog.log_duration_s(records) for _, records in loaded]
    rows = []
    for name, records in loaded:
        r = flightlog.score(records, plan, config, cohort)
        rows.append((name, r))
    rows.sort(key=lambda nr: nr[1].score, reverse=True)

    print(f"{'log':<40} {'score':>7} {'d_bar':>6} {'final_m':>8} "
          f"{'T_s':>8} {'gate':>5} {'photo':>5}")
    for name, r in rows:
        print(f"{name:<40} {r.score:7.4f} {r.d_bar:6.3f} {r.final_distance_m:8.2f} "
              f"{r.t_s:8.1f} {str(r.gate_passed):>5} {r.photo:>5}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    try:
        text = Path(args.log).read_text()
    except OSError as exc:
        print(f"cannot read log: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        records = flightlog.read_log(text)
        analytics = flightlog.analyze_path(records, spacing_m=args.spacing_m,
                                           turn_threshold_deg=args.turn_deg)
    except ValueError as exc:
        print(f"invalid log: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if analytics.degenerate:
        print("stationary or too-short trajectory: no plot data", file=sys.stderr)
    sys.stdout.write(flightlog.export_plot_data(analytics))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
