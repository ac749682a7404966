"""
Superconnection Transport Verifier: command-line entry point.

Loads a scenario, runs the selected verification suites and writes the report
(a JSON array of check records) to stdout and optionally to a file. Logs go to
stderr.

Exit codes: 0 all checks pass, 1 a check failed, 2 the scenario or flags are
invalid, 3 a runtime evaluation error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, TextIO

from .config import settings
from .exceptions import SCTError, ScenarioError
from .logger import logger, setup_logging
from .metrics import metrics
from .models import Report, Scenario
from .scenario import Workspace, build_workspace, load_scenario
from .suites import CONVERGENCE_SUITES, SUBCOMMANDS, build_checks, run_checks
from .utils import parse_tolerance_overrides


# ═══════════════════════════════════════════════════════════
# Argument parsing
# ═══════════════════════════════════════════════════════════

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sct",
        description=f"{settings.app_title} {settings.app_version}",
    )
    parser.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS, help="Suite to run ('all' runs every suite)")
    parser.add_argument("--scenario", help="Scenario JSON file (or the name of a bundled scenario)")
    parser.add_argument("--out", help="Also write the JSON report to this file")
    parser.add_argument("--quad-n", type=int, dest="quad_n", help="RK4 steps per unit of t")
    parser.add_argument("--gauss-order", type=int, dest="gauss_order", help="Gauss-Legendre nodes per parameter axis")
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="Tolerance override for a check, a check family or a class (exact, smooth, pl)")
    parser.add_argument("--seed", type=int, help="Seed for randomized property suites")
    parser.add_argument("--json", action="store_true", help="Print the JSON report and log as JSON")
    parser.add_argument("--schema", action="store_true", help="Print the scenario JSON schema and exit")
    parser.add_argument("--csv", help="Write a residual-vs-Gauss-order table for the convergence suites")
    parser.add_argument("--workers", type=int, help="Worker threads for independent checks")
    return parser


# ═══════════════════════════════════════════════════════════
# Running
# ═══════════════════════════════════════════════════════════

def run(
    subcommand: str,
    scenario_path: str,
    quad_n: Optional[int] = None,
    gauss_order: Optional[int] = None,
    tol: Sequence[str] = (),
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    csv_path: Optional[str] = None,
) -> Report:
    """Load, build and run; SCTError propagates with its exit code."""
    if subcommand not in SUBCOMMANDS:
        raise ScenarioError(f"Unknown subcommand {subcommand!r}")
    overrides = parse_tolerance_overrides(tol)
    metrics.reset()
    with metrics.timer("load") as load_timer:
        scenario = load_scenario(scenario_path)
        workspace = build_workspace(scenario, rk4_steps=quad_n, gauss_order=gauss_order)
    logger.info("Scenario ready in %.1f ms", load_timer.elapsed_ms,
                extra={"scenario": scenario.name, "duration_ms": load_timer.elapsed_ms})

    quad = workspace.quad
    checks = build_checks(subcommand, workspace, quad, seed)
    with metrics.timer("run") as run_timer:
        report = run_checks(checks, workspace, quad, overrides, workers)
    logger.info(
        "%s: %d/%d checks passed in %.1f ms", subcommand,
        sum(1 for c in report.checks if c.passed), len(report.checks), run_timer.elapsed_ms,
        extra={"scenario": scenario.name, "duration_ms": run_timer.elapsed_ms},
    )

    if csv_path:
        write_convergence_table(csv_path, subcommand, workspace, overrides, seed, workers)
    report.timing = metrics.to_dict()
    return report


def write_convergence_table(
    path: str,
    subcommand: str,
    workspace: Workspace,
    overrides: Mapping[str, float],
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> None:
    """Residual of every convergence check at Gauss order g and 2g."""
    suites = CONVERGENCE_SUITES if subcommand == "all" else [s for s in CONVERGENCE_SUITES if s == subcommand]
    if not suites:
        logger.warning("--csv has no convergence suite to tabulate for %s", subcommand)
        return
    rows: List[List[object]] = []
    for quad in (workspace.quad, workspace.quad.refined(2)):
        for suite in suites:
            report = run_checks(build_checks(suite, workspace, quad, seed), workspace, quad, overrides, workers)
            rows.extend([c.name, quad.gauss_order, quad.rk4_steps, repr(c.residual)] for c in report.checks)
    rows.sort(key=lambda row: (row[0], row[1]))
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["check", "gauss_order", "rk4_steps", "residual"])
        writer.writerows(rows)
    logger.info("Wrote %d convergence rows to %s", len(rows), path)


# ═══════════════════════════════════════════════════════════
# Output
# ═══════════════════════════════════════════════════════════

def render_json(report: Report) -> str:
    return json.dumps(report.body(), indent=2)


def render_table(report: Report) -> str:
    if not report.checks:
        return f"{report.scenario}: no checks selected\n"
    width = max(len(c.name) for c in report.checks)
    lines = [f"{'check':<{width}}  {'residual':>10}  {'tolerance':>9}  result"]
    for check in report.checks:
        result = "PASS" if check.passed else "FAIL"
        lines.append(f"{check.name:<{width}}  {check.residual:>10.3e}  {check.tolerance:>9.1e}  {result}")
    verdict = "PASS" if report.passed else "FAIL"
    lines.append(f"{report.scenario}: {verdict} ({sum(c.passed for c in report.checks)}/{len(report.checks)})")
    return "\n".join(lines) + "\n"


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be >= 1")

    setup_logging(level=settings.log_level, json_mode=settings.log_json or args.json)

    if args.schema:
        stdout.write(json.dumps(Scenario.model_json_schema(), indent=2) + "\n")
        return 0
    if not args.subcommand or not args.scenario:
        parser.error("a subcommand and --scenario are required")

    try:
        report = run(
            args.subcommand, args.scenario,
            quad_n=args.quad_n, gauss_order=args.gauss_order, tol=args.tol,
            seed=args.seed, workers=args.workers, csv_path=args.csv,
        )
    except SCTError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        return exc.exit_code

    if args.out:
        try:
            Path(args.out).write_text(render_json(report) + "\n", encoding="utf-8")
        except OSError as exc:
            logger.error("Cannot write %s: %s", args.out, exc)
            return ScenarioError.exit_code
    stdout.write(render_json(report) + "\n" if args.json else render_table(report))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
