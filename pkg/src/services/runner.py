"""Experiment orchestrator for the lab commands.

Runs one or more of:
- scan: negativity of the one-particle energy density
- classify: QEI existence / no-go verdict
- minimize: sharp one-particle bound and witness state
- bound: closed-form Ising bound and the Q profile
- verify: one-particle minima against the Ising bound (or positivity)

Each command writes `<command>.json` (and its CSV series) to the output
directory; `report` also writes a combined `report.json`.
"""

import logging
import time
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Optional

from pydantic import BaseModel, Field

from .criteria import (
    InconclusiveAsymptoteError,
    admissible_alpha_bound,
    classify_degree,
    linear_family_table,
    negativity_scan,
    sample_fp_to_csv,
)
from .integrable import fmin_asymptote
from .isingbound import ising_bound, massless_limit_bound, q_table_to_csv
from .models import CONVENTIONS, Provenance, TestFunction
from .numerics import QEILabError
from .optimizer import best_constant, witness_to_csv
from .reports import build_provenance, write_json, write_rows_csv
from .testfn import gaussian

if TYPE_CHECKING:
    from ..cli.validation import ResolvedRun

logger = logging.getLogger(__name__)

COMMANDS = ("scan", "classify", "minimize", "bound", "verify")
REPORT_COMMANDS = ("scan", "classify", "minimize", "bound")

# Relative slack of the one-particle minimum against the Ising bound
VERIFY_SLACK = 1e-6


class CommandStatus(str, Enum):
    """Status of a lab command."""

    SUCCESS = "success"
    FAILED = "failed"


class CommandResult(BaseModel):
    """Result of one lab command."""

    command: str
    status: CommandStatus = CommandStatus.SUCCESS
    outputs: list[str] = Field(default_factory=list)  # file names in the output directory
    errors: list[str] = Field(default_factory=list)
    error_kind: Optional[str] = None
    converged: Optional[bool] = None
    verified: Optional[bool] = None
    data: dict = Field(default_factory=dict)


class LabReport(BaseModel):
    """Results of a set of lab commands with their shared provenance."""

    provenance: Provenance
    commands: dict[str, CommandResult] = Field(default_factory=dict)
    success: bool = False


class VerificationFailure(QEILabError):
    """Raised when a one-particle minimum falls below its expected floor."""

    def __init__(self, message: str, failures: list[dict]):
        super().__init__(f"{message} ({len(failures)} failing rows)")
        self.failures = failures


class LabRunner:
    """Runs lab commands for one resolved configuration."""

    def __init__(self, run: "ResolvedRun", output_dir: Optional[Path] = None):
        self.run = run
        self.output_dir = output_dir or run.output_dir
        self.provenance = build_provenance(
            run.describe(), run.convention, run.ladder, run.tolerance
        )

    def _execute(self, command: str, action: Callable[[CommandResult], None]) -> CommandResult:
        """Run one command, record failures, and write its JSON report."""
        result = CommandResult(command=command)
        started = time.perf_counter()
        try:
            action(result)
        except (QEILabError, ValueError) as e:
            logger.error(f"Command {command} failed: {e}")
            result.status = CommandStatus.FAILED
            result.errors.append(str(e))
            result.error_kind = type(e).__name__
        logger.info(f"{command} finished in {time.perf_counter() - started:.2f}s")

        name = f"{command}.json"
        result.outputs.insert(0, name)
        payload = {"provenance": self.provenance.model_dump(mode="json")}
        payload.update(result.model_dump(mode="json"))
        write_json(self.output_dir / name, payload)
        return result

    def _describe(self) -> dict:
        return {
            "model": self.run.model.describe(),
            "polynomial": list(self.run.polynomial.coefficients),
        }

    # =========================================================================
    # COMMANDS
    # =========================================================================

    def run_scan(self) -> CommandResult:
        """Negativity scan with the |F_P| samples as CSV."""

        def action(result: CommandResult) -> None:
            run = self.run
            witness = negativity_scan(
                run.model,
                run.polynomial,
                run.theta_max,
                run.samples,
                run.epsilon,
                attach_witness=run.config.witness,
                ladder=run.ladder,
                convention=run.convention,
            )
            csv_path = self.output_dir / "scan_fp.csv"
            sample_fp_to_csv(run.model, run.polynomial, csv_path, run.theta_max, run.samples)
            result.outputs.append("scan_fp.csv")
            result.data = {
                **self._describe(),
                "verdict": "witness" if witness is not None else "none",
                "witness": witness.model_dump(mode="json") if witness is not None else None,
            }

        return self._execute("scan", action)

    def run_classify(self) -> CommandResult:
        """QEI verdict, admissible α range and the optional linear-family table."""

        def action(result: CommandResult) -> None:
            run = self.run
            verdict = classify_degree(run.model, run.polynomial, run.theta_max, run.margin)
            try:
                alpha_bound = admissible_alpha_bound(run.model)
            except InconclusiveAsymptoteError as e:
                alpha_bound = None
                result.errors.append(str(e))
            result.data = {
                **self._describe(),
                **verdict.model_dump(mode="json"),
                "admissible_alpha_bound": alpha_bound,
                "asymptote": fmin_asymptote(run.model).model_dump(mode="json"),
            }
            if run.config.alphas:
                result.data["linear_family"] = linear_family_table(
                    run.model, run.config.alphas, run.theta_max, run.margin
                )

        return self._execute("classify", action)

    def run_minimize(self) -> CommandResult:
        """Sharp one-particle bound with the witness state as CSV."""

        def action(result: CommandResult) -> None:
            run = self.run
            bound = best_constant(
                run.model,
                run.polynomial,
                run.test_function,
                tolerance=run.tolerance,
                ladder=run.ladder,
                convention=run.convention,
            )
            witness_to_csv(bound, self.output_dir / "witness.csv")
            result.outputs.append("witness.csv")
            result.converged = bound.converged
            result.data = {
                **self._describe(),
                "test_function": run.test_function.model_dump(mode="json"),
                **bound.to_dict(),
            }

        return self._execute("minimize", action)

    def run_bound(self) -> CommandResult:
        """Ising bound for the configured g, its mass monotonicity check and the Q table."""

        def action(result: CommandResult) -> None:
            run = self.run
            g, mu = run.test_function, run.model.mass
            bound = ising_bound(g, mu, convention=run.convention)
            doubled = ising_bound(g, 2.0 * mu, convention=run.convention)
            q_table_to_csv(self.output_dir / "q_table.csv")
            result.outputs.append("q_table.csv")
            result.data = {
                "test_function": g.model_dump(mode="json"),
                "applies_to_model": run.model.kind == "ising",
                "bound": bound.model_dump(mode="json"),
                "bound_mass_doubled": doubled.value,
                "monotone_in_mass": abs(doubled.value) <= abs(bound.value) + doubled.error,
                "massless_limit": massless_limit_bound(g, convention=run.convention),
            }

        return self._execute("bound", action)

    def _verify_rows(self, convention: str) -> list[dict]:
        run = self.run
        m, p = run.model, run.polynomial
        rows = []
        for width in run.family:
            g = gaussian(width / m.mass)
            bound = best_constant(
                m, p, g, tolerance=run.tolerance, ladder=run.ladder, convention=convention
            )
            rows.append(self._verify_row(g, width, bound.lam, bound.converged, convention))
        return rows

    def _verify_row(
        self, g: TestFunction, width: float, lam: float, converged: bool, convention: str
    ) -> dict:
        run = self.run
        m, p = run.model, run.polynomial
        reference: Optional[float] = None
        if m.kind == "ising" and p.degree == 0:
            reference = ising_bound(g, m.mass, convention=convention).value
            floor: Optional[float] = reference - VERIFY_SLACK * abs(reference)
            check = "ising_bound"
        elif m.kind == "free" and p.degree == 0:
            floor = -run.tolerance * max(1.0, abs(lam))
            check = "positivity"
        else:
            floor = None
            check = "none"
        return {
            "sigma": g.sigma,
            "width": width,
            "convention": convention,
            "check": check,
            "lambda_min": lam,
            "bound": reference,
            "floor": floor,
            "passed": floor is None or lam >= floor,
            "converged": converged,
        }

    def run_verify(self) -> CommandResult:
        """λ_min ≥ bound per gaussian width, under both transform conventions."""

        def action(result: CommandResult) -> None:
            run = self.run
            by_convention = {
                convention: self._verify_rows(convention) for convention in sorted(CONVENTIONS)
            }
            calibration = {
                convention: all(row["passed"] for row in rows)
                for convention, rows in by_convention.items()
            }
            rows = by_convention[run.convention]
            header = list(rows[0].keys())
            write_rows_csv(
                self.output_dir / "verify.csv", header, [[row[k] for k in header] for row in rows]
            )
            result.outputs.append("verify.csv")
            result.converged = all(row["converged"] for row in rows)
            result.verified = calibration[run.convention]
            result.data = {**self._describe(), "rows": rows, "calibration": calibration}
            if not any(calibration.values()):
                result.data["finding"] = "no transform convention satisfies every row"

            failures = [row for row in rows if not row["passed"]]
            if failures:
                raise VerificationFailure("One-particle minimum below its floor", failures)

        return self._execute("verify", action)

    # =========================================================================
    # ORCHESTRATION
    # =========================================================================

    def run_commands(self, commands: tuple[str, ...]) -> LabReport:
        """Run commands serially in the given order."""
        handlers = {
            "scan": self.run_scan,
            "classify": self.run_classify,
            "minimize": self.run_minimize,
            "bound": self.run_bound,
            "verify": self.run_verify,
        }
        report = LabReport(provenance=self.provenance)
        for command in commands:
            if command not in handlers:
                raise ValueError(f"Unknown command: {command!r}")
            logger.info(f"Running {command}")
            report.commands[command] = handlers[command]()
        report.success = all(
            result.status == CommandStatus.SUCCESS for result in report.commands.values()
        )
        return report

    def run_report(self) -> LabReport:
        """Run scan, classify, minimize and bound and write report.json."""
        report = self.run_commands(REPORT_COMMANDS)
        write_json(self.output_dir / "report.json", report.model_dump(mode="json"))
        return report


def run_lab(run: "ResolvedRun", command: str, output_dir: Optional[Path] = None) -> LabReport:
    """Convenience function to run one command, or `report` for the full set.

    Args:
        run: Resolved configuration
        command: One of COMMANDS or "report"
        output_dir: Output directory (uses the configured one if not provided)

    Returns:
        LabReport with one entry per command run
    """
    runner = LabRunner(run, output_dir)
    if command == "report":
        return runner.run_report()
    return runner.run_commands((command,))
