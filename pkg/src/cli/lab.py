#!/usr/bin/env python3
"""CLI for the QEI laboratory.

Usage:
    # Negativity scan for the configured model and polynomial
    qei-lab scan --config ising.json

    # QEI verdict on the free field with a linear polynomial
    qei-lab classify --config free_alpha.json --theta-max 40

    # Sharp one-particle bound, normalized transform convention
    qei-lab minimize --config ising.json --convention normalized

    # Ising bound and Q table
    qei-lab bound --config ising.json --out results/

    # Cross-check one-particle minima against the Ising bound
    qei-lab verify --config ising.json --strict

    # Everything except verify, with a combined report.json
    qei-lab report --config ising.json --json

Exit codes:
    0  success
    1  invalid configuration
    2  verification failure
    3  numerical failure (non-convergence only with --strict)
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from ..services.models import CONVENTIONS
from ..services.runner import COMMANDS, CommandStatus, LabReport, run_lab
from .validation import ConfigValidationError, apply_overrides, load_run_config, resolve

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = {"QuadratureError", "EigensolverError", "HermiticityError"}

console = Console()
error_console = Console(stderr=True)


def setup_logging(verbose: bool = False, log_file: Optional[Path] = None):
    """Configure logging for the CLI; stdout stays free for --json output."""
    level = logging.DEBUG if verbose else logging.INFO

    handlers: list[logging.Handler] = [
        RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    ]

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
        handlers.append(file_handler)

    logging.basicConfig(level=level, format="%(message)s", handlers=handlers, force=True)


def exit_code(report: LabReport, strict: bool = False) -> int:
    """Map a report to the process exit code."""
    for result in report.commands.values():
        if result.status == CommandStatus.FAILED:
            if result.error_kind == "VerificationFailure":
                return EXIT_VERIFICATION
            if result.error_kind in NUMERICAL_ERRORS:
                return EXIT_NUMERICAL
            return EXIT_VALIDATION
    if strict and any(result.converged is False for result in report.commands.values()):
        return EXIT_NUMERICAL
    return EXIT_OK


def _headline(command: str, data: dict) -> str:
    if command == "scan":
        witness = data.get("witness")
        if witness is None:
            return "no |F_P| > 1"
        return f"θ_P = {witness['theta_p']:.6g}, |F_P| = {witness['abs_fp']:.6g}"
    if command == "classify":
        return f"{data.get('verdict')} (c = {data.get('c', float('nan')):.6g})"
    if command == "minimize":
        return f"λ_min = {data.get('lambda_min', float('nan')):.10g}"
    if command == "bound":
        return f"bound = {data.get('bound', {}).get('value', float('nan')):.10g}"
    if command == "verify":
        return f"calibration {data.get('calibration')}"
    return ""


def print_result(report: LabReport):
    """Print a summary table of the commands run."""
    success = "[green]✓ SUCCESS[/green]" if report.success else "[red]✗ FAILED[/red]"
    console.print(f"\n=== QEI lab: {success} ===  (config {report.provenance.config_hash})\n")

    table = Table()
    table.add_column("Command")
    table.add_column("Status")
    table.add_column("Result")
    table.add_column("Converged")
    table.add_column("Outputs")
    for command, result in report.commands.items():
        status = "✓" if result.status == CommandStatus.SUCCESS else "✗"
        converged = "" if result.converged is None else ("yes" if result.converged else "no")
        headline = _headline(command, result.data) if result.data else "; ".join(result.errors)
        table.add_row(command, status, headline, converged, ", ".join(result.outputs))
    console.print(table)

    for command, result in report.commands.items():
        for error in result.errors[:3]:
            console.print(f"  [red]{command}:[/red] {error[:100]}")
    console.print()


def print_error(error: Exception, as_json: bool):
    """Report a fatal error.

    The machine-readable record always goes to stdout; without --json a
    readable message is added on stderr.
    """
    print(
        json.dumps(
            {"success": False, "error": str(error), "kind": type(error).__name__},
            ensure_ascii=False,
            sort_keys=True,
        )
    )
    if not as_json:
        error_console.print(f"\n[red]✗ ERROR:[/red] {error}\n")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per lab command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Run configuration (JSON)")
    common.add_argument("--out", type=Path, help="Output directory for reports")
    common.add_argument(
        "--convention", choices=sorted(CONVENTIONS), help="Fourier transform convention"
    )
    common.add_argument("--theta-max", type=float, help="Rapidity scan range Θ_max")
    common.add_argument("--tolerance", type=float, help="Convergence tolerance of the ladder")
    common.add_argument("--strict", action="store_true", help="Treat non-convergence as fatal")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    common.add_argument("--log-file", type=Path, help="Also log to this file")
    common.add_argument("--json", action="store_true", help="Output result as JSON (for scripting)")

    parser = argparse.ArgumentParser(
        prog="qei-lab",
        description="One-particle quantum energy inequalities in integrable models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (*COMMANDS, "report"):
        subparsers.add_parser(command, parents=[common])
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Run the CLI and return the exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(verbose=args.verbose, log_file=args.log_file)
    logger = logging.getLogger(__name__)

    try:
        config = load_run_config(args.config)
        config = apply_overrides(
            config,
            convention=args.convention,
            theta_max=args.theta_max,
            tolerance=args.tolerance,
            output_dir=str(args.out) if args.out else None,
        )
        base_dir = args.config.parent if args.config else None
        run = resolve(config, base_dir=base_dir)
    except ConfigValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        print_error(e, args.json)
        return EXIT_VALIDATION

    logger.info(f"Running {args.command} with output in {run.output_dir}")
    report = run_lab(run, args.command)

    if args.json:
        payload = report.model_dump(mode="json")
        print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
    else:
        print_result(report)

    return exit_code(report, strict=args.strict)


def cli_main():
    """Entry point for CLI."""
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
