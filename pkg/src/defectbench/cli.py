"""CLI commands: run, oracle-check, print-config-schema, ceff."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .analysis import c_eff, transmission
from .config import RuntimeSettings, config_schema, load_config
from .errors import ConfigError, SpecError
from .precision import PrecisionContext
from .workbench import EXIT_CONFIG, PointResult, oracle_check, plan_sweep, run

app = typer.Typer(
    name="defectbench",
    help="Entanglement Hamiltonians of critical Ising chains with bond defects, at high precision.",
    add_completion=False,
)
console = Console()

CONFIG_ARGUMENT = typer.Argument(
    None, help="Experiment file or a directory to search upward from (default: cwd)"
)


def _configure_logging(verbose: bool, settings: RuntimeSettings) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _settings() -> RuntimeSettings:
    try:
        return RuntimeSettings.from_env()
    except ConfigError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_CONFIG) from exc


def _fail_on_spec_error(exc: SpecError) -> None:
    console.print(f"[red]Error:[/red] {exc}")
    raise typer.Exit(EXIT_CONFIG) from exc


@app.command("run")
def run_command(
    config_path: Optional[Path] = CONFIG_ARGUMENT,
    output_dir: Optional[Path] = typer.Option(
        None, "--output-dir", "-o", help="Override output_dir from the experiment file"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Run every sweep point and write one CSV per observable plus the run manifest."""
    settings = _settings()
    _configure_logging(verbose, settings)
    try:
        cfg = load_config(config_path)
        if output_dir is not None:
            cfg = cfg.model_copy(update={"output_dir": output_dir})
        total = len(plan_sweep(cfg))
    except SpecError as exc:
        _fail_on_spec_error(exc)

    console.print(Panel(
        f"[bold]defectbench run[/bold]\n"
        f"Sweep points: [cyan]{total}[/cyan]  threads: [cyan]{settings.max_threads}[/cyan]\n"
        f"Observables: [cyan]{', '.join(cfg.ordered_observables())}[/cyan]\n"
        f"Output: [cyan]{cfg.output_dir}[/cyan]",
        border_style="blue",
    ))

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        console=console,
    ) as progress:
        task = progress.add_task("Evaluating sweep points...", total=total)

        def advance(result: PointResult) -> None:
            progress.update(
                task,
                advance=1,
                description=f"N={result.point.n_sites} J*={result.point.j_label or '-'}",
            )

        result = run(cfg, settings=settings, on_point=advance)

    table = Table(title="Sweep points", border_style="green")
    for column in ("N", "J*", "dps", "zero modes", "status"):
        table.add_column(column, justify="right" if column != "status" else "left")
    for point in result.results:
        status = "[green]ok[/green]" if point.error is None else "[red]failed[/red]"
        if point.escalated:
            status += " (escalated)"
        table.add_row(
            str(point.point.n_sites),
            point.point.j_label or "-",
            str(point.dps),
            str(point.zero_modes),
            status,
        )
    console.print(table)

    console.print("\n[green]Written files:[/green]")
    for f in result.files:
        console.print(f"  [cyan]{f}[/cyan]")
    for failure in result.failures:
        console.print(f"[red]Precision failure:[/red] {failure}")
    raise typer.Exit(result.exit_code)


@app.command("oracle-check")
def oracle_check_command(
    config_path: Optional[Path] = CONFIG_ARGUMENT,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Compare the Gaussian pipeline with exact diagonalization (N <= 12)."""
    _configure_logging(verbose, _settings())
    try:
        report = oracle_check(load_config(config_path))
    except SpecError as exc:
        _fail_on_spec_error(exc)

    table = Table(title="Max deviation per observable", border_style="blue")
    table.add_column("Observable", style="bold")
    table.add_column("Deviation", justify="right")
    for name, value in report.max_deviations().items():
        colour = "green" if value <= report.tolerance else "red"
        table.add_row(name, f"[{colour}]{value:.3e}[/{colour}]")
    console.print(table)
    verdict = "[bold green]pass[/bold green]" if report.passed else "[bold red]FAIL[/bold red]"
    console.print(f"Oracle check {verdict} (tolerance {report.tolerance:.0e})")
    raise typer.Exit(report.exit_code)


@app.command("print-config-schema")
def print_config_schema() -> None:
    """Print the JSON schema of the experiment file."""
    console.print_json(json.dumps(config_schema()))


@app.command("ceff")
def ceff_command(
    j_star: list[str] = typer.Argument(..., help="Defect strengths J*"),
    digits: int = typer.Option(30, "--digits", "-d", help="Working decimal digits"),
) -> None:
    """Boundary effective central charge c_eff(J*)."""
    try:
        ctx = PrecisionContext(digits)
        rows = [(j, transmission(j, ctx), c_eff(j, ctx)) for j in j_star]
    except (SpecError, ValueError) as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_CONFIG) from exc

    table = Table(title=f"c_eff at {digits} digits", border_style="green")
    table.add_column("J*", style="bold")
    table.add_column("s", justify="right")
    table.add_column("c_eff", justify="right")
    for j, s, value in rows:
        table.add_row(j, ctx.to_decimal_string(s), ctx.to_decimal_string(value))
    console.print(table)
