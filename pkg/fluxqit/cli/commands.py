"""CLI commands for fluxqit."""

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import click
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from fluxqit.core.errors import ConfigError, QitError
from fluxqit.helpers.config import RunConfig, load_config
from fluxqit.helpers.logger import level_for, log_operation, setup_logging
from fluxqit.models.enums import ExitCode
from fluxqit.version import __version__

console = Console(highlight=False)
err_console = Console(stderr=True, highlight=False)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map fluxqit errors onto the documented exit codes."""
    try:
        yield
    except ConfigError as e:
        err_console.print(f"[red]Configuration error:[/red] {escape(str(e))}", soft_wrap=True)
        raise SystemExit(ExitCode.CONFIG_ERROR) from e
    except (QitError, ValidationError) as e:
        err_console.print(f"[red]Simulation error:[/red] {escape(str(e))}", soft_wrap=True)
        raise SystemExit(ExitCode.SIMULATION_ERROR) from e


def _load(ctx: click.Context, config_path: Path) -> RunConfig:
    config = load_config(config_path)
    setup_logging(
        level=level_for(ctx.obj.get("verbose", 0), config.logging.level),
        log_format=config.logging.format,
        log_file=config.logging.file,
        max_size_mb=config.logging.max_size_mb,
        backup_count=config.logging.backup_count,
    )
    return config


config_option = click.option(
    "--config",
    "-c",
    "config_path",
    required=True,
    type=click.Path(path_type=Path, dir_okay=False),
    help="Run document (YAML)",
)
output_option = click.option(
    "--output",
    "-o",
    "output_dir",
    default=Path("results"),
    show_default=True,
    type=click.Path(path_type=Path, file_okay=False),
    help="Directory for result files",
)


@click.group()
@click.version_option(version=__version__, prog_name="fluxqit")
@click.option("--verbose", "-v", count=True, help="More log output (-v info, -vv debug)")
@click.pass_context
def cli(ctx: click.Context, verbose: int) -> None:
    """fluxqit - quantum information transfer between flux qubits through a cavity"""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    setup_logging(level=level_for(verbose))


@cli.command()
@config_option
@output_option
@click.option("--trace/--no-trace", default=None, help="Record population traces")
@click.pass_context
def run(ctx: click.Context, config_path: Path, output_dir: Path, trace: bool | None) -> None:
    """Transfer every configured input and write the results table."""
    from fluxqit.core.harness import run as run_transfer

    with _exit_codes():
        config = _load(ctx, config_path)
        with log_operation("run", mode=config.mode.value):
            outcome = run_transfer(config, output_dir, trace=trace)

    table = Table(title="Transfer results")
    table.add_column("Input", style="cyan")
    table.add_column("Fidelity", justify="right")
    table.add_column("Leakage", justify="right")
    table.add_column("Cavity residual", justify="right")
    for report in outcome.reports:
        table.add_row(
            report.input_label,
            f"{report.fidelity:.12f}",
            f"{report.leakage:.3e}",
            f"{report.cavity_residual:.3e}",
        )
    err_console.print(table)
    console.print(outcome.summary_line(), soft_wrap=True, markup=False)


@cli.command("sweep")
@config_option
@output_option
@click.option("--workers", "-j", type=click.IntRange(min=1), default=None, help="Parallel workers")
@click.pass_context
def sweep_command(
    ctx: click.Context,
    config_path: Path,
    output_dir: Path,
    workers: int | None,
) -> None:
    """Evaluate the grid section and write one row per point and input."""
    from fluxqit.core.harness import run_sweep

    with _exit_codes():
        config = _load(ctx, config_path)
        with log_operation("sweep", mode=config.mode.value):
            outcome = run_sweep(config, output_dir, workers=workers)

    console.print(outcome.summary_line(), soft_wrap=True, markup=False)


@cli.command()
@config_option
@click.pass_context
def budget(ctx: click.Context, config_path: Path) -> None:
    """Compare the operation time with the cavity and qubit lifetimes."""
    from fluxqit.core.harness import run_budget

    with _exit_codes():
        config = _load(ctx, config_path)
        with log_operation("budget"):
            report = run_budget(config)

    table = Table(title="Timing budget")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("tau", f"{report.tau:.4e} s")
    table.add_row("kappa^-1", f"{report.kappa_inv:.4e} s")
    table.add_row("tau / kappa^-1", f"{report.ratio_cavity:.3e}")
    if report.min_decoherence_time is not None and report.ratio_decoherence is not None:
        table.add_row("min decoherence time", f"{report.min_decoherence_time:.4e} s")
        table.add_row("tau / min decoherence time", f"{report.ratio_decoherence:.3e}")
    console.print(table)

    for warning in report.warnings:
        console.print(f"WARN {warning}", soft_wrap=True, markup=False)
    if report.ok:
        console.print(f"OK worst ratio {report.worst_ratio:.3e}", soft_wrap=True, markup=False)


@cli.command()
@config_option
@click.pass_context
def validate(ctx: click.Context, config_path: Path) -> None:
    """Parse and validate a run document without simulating."""
    with _exit_codes():
        config = _load(ctx, config_path)

    console.print(
        f"valid: schema={config.schema_version} mode={config.mode.value} "
        f"inputs={len(config.inputs)} grid_axes={len(config.grid)}",
        soft_wrap=True,
        markup=False,
    )


@cli.command()
def version() -> None:
    """Show fluxqit version."""
    console.print(f"fluxqit version [bold]{__version__}[/bold]")


if __name__ == "__main__":
    cli()
