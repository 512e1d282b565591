"""Run, sweep and budget jobs driven by a RunConfig.

Each job evaluates the configured experiment and writes its result files;
the command line only formats what these functions return.
"""

from dataclasses import dataclass, field
from pathlib import Path

from fluxqit.core.analysis import (
    budget_report,
    evaluate_input,
    mean_fidelity,
    operation_time,
    schedule_for,
    sweep,
)
from fluxqit.core.errors import ConfigError
from fluxqit.helpers.config import RunConfig
from fluxqit.helpers.logger import get_logger
from fluxqit.helpers.tables import write_reports, write_summary, write_sweep, write_trace
from fluxqit.models.enums import RecordOption
from fluxqit.models.reports import BudgetReport, SweepRow, TransferReport
from fluxqit.models.schedule import Schedule

logger = get_logger("harness")

RESULTS_FILE = "results.csv"
SCHEDULE_FILE = "schedule.yml"
SUMMARY_FILE = "summary.json"
SWEEP_FILE = "sweep.csv"
TRACE_DIR = "traces"


@dataclass
class RunOutcome:
    """Reports of one run and the files written for it."""

    schedule: Schedule
    reports: list[TransferReport]
    tau: float
    files: list[Path] = field(default_factory=list)

    @property
    def min_fidelity(self) -> float:
        return min(report.fidelity for report in self.reports)

    @property
    def mean_fidelity(self) -> float:
        return mean_fidelity(self.reports)

    def summary_line(self) -> str:
        mode = self.reports[0].mode.value
        return (
            f"mode={mode} inputs={len(self.reports)} tau={self.tau:.4e} s "
            f"min_fidelity={self.min_fidelity:.12f} mean_fidelity={self.mean_fidelity:.12f}"
        )


@dataclass
class SweepOutcome:
    """Rows of one sweep and the table they were written to."""

    rows: list[SweepRow]
    path: Path

    def summary_line(self) -> str:
        worst = min(row.report.fidelity for row in self.rows)
        points = len({tuple(row.point.items()) for row in self.rows})
        return f"points={points} rows={len(self.rows)} min_fidelity={worst:.12f} table={self.path}"


def run(config: RunConfig, output_dir: Path, trace: bool | None = None) -> RunOutcome:
    """Transfer every configured input and write results, schedule and summary.

    ``trace`` overrides the document's ``trace`` flag; traces go to one table
    per input under ``traces/``.
    """
    params = config.transfer_params()
    schedule = schedule_for(params)
    record = RecordOption.POPULATIONS if (config.trace if trace is None else trace) else RecordOption.NONE
    params_json = config.canonical_json()

    output_dir.mkdir(parents=True, exist_ok=True)
    outcome = RunOutcome(schedule=schedule, reports=[], tau=operation_time(params, schedule))

    for index, item in enumerate(config.input_states()):
        report, result = evaluate_input(params, schedule, item, record)
        outcome.reports.append(report)
        logger.info("input_done", input=item.label, fidelity=report.fidelity)
        if result.trace:
            path = output_dir / TRACE_DIR / f"trace_{index:02d}.csv"
            outcome.files.append(write_trace(path, params_json, item.label, result.trace))

    outcome.files.append(write_reports(output_dir / RESULTS_FILE, params_json, outcome.reports))

    schedule_path = output_dir / SCHEDULE_FILE
    schedule_path.write_text(schedule.to_document(), encoding="utf-8")
    outcome.files.append(schedule_path)

    summary = {
        "schema": config.schema_version,
        "mode": params.mode.value,
        "tau": outcome.tau,
        "min_fidelity": outcome.min_fidelity,
        "mean_fidelity": outcome.mean_fidelity,
        "reports": [report.model_dump(mode="json") for report in outcome.reports],
    }
    outcome.files.append(write_summary(output_dir / SUMMARY_FILE, summary))
    return outcome


def run_sweep(config: RunConfig, output_dir: Path, workers: int | None = None) -> SweepOutcome:
    """Evaluate the document's grid and write the sweep table."""
    if not config.grid:
        raise ConfigError("sweep needs a non-empty 'grid' section")
    rows = sweep(
        config.grid,
        config.transfer_params(),
        config.input_states(),
        workers=workers if workers is not None else config.workers,
    )
    path = write_sweep(output_dir / SWEEP_FILE, config.canonical_json(), rows)
    return SweepOutcome(rows=rows, path=path)


def run_budget(config: RunConfig) -> BudgetReport:
    """Timing budget of the configured parameters."""
    q_factor, nu_c = config.cavity.q_factor, config.cavity.nu_c
    if q_factor is None or nu_c is None:
        raise ConfigError("budget needs cavity.q_factor and cavity.nu_c")
    return budget_report(
        config.g1,
        config.g2,
        config.omega,
        q_factor,
        nu_c,
        noise=config.noise.to_noise_model(),
    )
