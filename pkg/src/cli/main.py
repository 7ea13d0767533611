"""
Command-line interface for the Stable-Limit SDE Lab.
"""
import sys
from pathlib import Path
from typing import Optional

import typer
from rich import box
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.core import __version__  # noqa: E402
from src.core.config import load_config  # noqa: E402
from src.core.exceptions import ConfigError, SimulationError  # noqa: E402
from src.core.log import configure_logging  # noqa: E402
from src.core.models.schemas import ExperimentName, RunManifest  # noqa: E402
from src.core.runner import DEFAULT_GRIDS, DESCRIPTIONS, ExperimentRunner  # noqa: E402

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCEPTANCE = 3
EXIT_IO = 4

app = typer.Typer(
    name="stable-lab",
    help="Stable-Limit SDE Lab - alpha -> 2 weak convergence experiments",
    add_completion=False,
)
console = Console()


def display_manifest(manifest: RunManifest, verbose: bool = False) -> None:
    """Summary panel, result files and (verbose) the resolved configuration"""
    status = "[bold green]PASSED[/bold green]" if manifest.passed else "[bold red]FAILED[/bold red]"
    console.print(Panel(
        f"[bold cyan]{manifest.config_echo['experiment']}[/bold cyan]  seed {manifest.seed}\n"
        f"Status: {status}\n"
        f"Wall time: {manifest.wall_time:.2f} s",
        title="[Run]",
        border_style="cyan" if manifest.passed else "red",
    ))

    files = Table(title="Result Files", box=box.ROUNDED)
    files.add_column("Kind", style="cyan")
    files.add_column("Path", style="green")
    for kind, path in manifest.result_files.items():
        files.add_row(kind, path)
    console.print(files)

    if manifest.failed_checks:
        console.print("\n[bold red]Failed checks:[/bold red]")
        for name in manifest.failed_checks:
            console.print(f"  - {name}")

    if verbose:
        config = Table(title="Resolved Configuration", box=box.SIMPLE)
        config.add_column("Field", style="cyan")
        config.add_column("Value")
        for key, value in manifest.config_echo.items():
            config.add_row(key, str(value))
        console.print(config)


def display_failure(exc: SimulationError, record: Optional[Path]) -> None:
    """Error panel for a run stopped by a domain or numerical error"""
    label = "Domain error" if exc.category == "domain" else "Numerical error"
    body = f"[bold]{type(exc).__name__}[/bold]\n{escape(str(exc))}"
    if record is not None:
        body += f"\n\nFailure record: [green]{record}[/green]"
    console.print(Panel(body, title=f"[{label}]", border_style="red"))


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    list_flag: bool = typer.Option(False, "--list-experiments", help="Show the experiment registry and exit"),
):
    """Stable-Limit SDE Lab"""
    if list_flag:
        list_experiments()
        raise typer.Exit(EXIT_OK)
    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@app.command()
def run(
    config_path: Path = typer.Argument(..., help="Experiment configuration file"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", min=1, help="Worker threads"),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", "-o", help="Result directory"),
    smoke: bool = typer.Option(False, "--smoke", help="Tiny preset; Monte Carlo checks are not enforced"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging and config echo"),
):
    """
    Run the experiment named in a configuration file.

    Examples:
        stable-lab run configs/example41.ini
        stable-lab run configs/sde_weak_rate.ini --workers 8 --output-dir out
    """
    configure_logging(verbose)
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        console.print(f"[red]Config error: {escape(str(exc))}[/red]")
        raise typer.Exit(EXIT_CONFIG)

    experiment_runner: Optional[ExperimentRunner] = None
    try:
        with Progress(SpinnerColumn(), TextColumn("{task.description}"), console=console) as progress:
            task = progress.add_task(f"Running {config.experiment.value}...", total=None)

            def on_progress(message: str) -> None:
                progress.update(task, description=f"{config.experiment.value}: {message}")

            experiment_runner = ExperimentRunner(config, output_dir, workers, smoke, on_progress)
            manifest = experiment_runner.run()
    except SimulationError as exc:
        display_failure(exc, experiment_runner.failure_path if experiment_runner else None)
        raise typer.Exit(EXIT_CONFIG if exc.category == "domain" else EXIT_ACCEPTANCE)
    except OSError as exc:
        console.print(f"[red]I/O error: {escape(str(exc))}[/red]")
        raise typer.Exit(EXIT_IO)

    display_manifest(manifest, verbose)
    if not manifest.passed:
        raise typer.Exit(EXIT_ACCEPTANCE)


@app.command("list-experiments")
def list_experiments():
    """Show the experiment registry"""
    table = Table(title="Experiments", box=box.ROUNDED)
    table.add_column("Name", style="cyan")
    table.add_column("Default alpha grid", style="green")
    table.add_column("Description")
    for name in ExperimentName:
        table.add_row(name.value, ", ".join(f"{a:g}" for a in DEFAULT_GRIDS[name]), DESCRIPTIONS[name])
    console.print(table)


@app.command()
def validate(config_path: Path = typer.Argument(..., help="Experiment configuration file")):
    """Parse and range-check a configuration without running it"""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        console.print(f"[red]Config error: {escape(str(exc))}[/red]")
        raise typer.Exit(EXIT_CONFIG)

    table = Table(title=f"{config_path}", box=box.SIMPLE)
    table.add_column("Field", style="cyan")
    table.add_column("Value")
    table.add_column("Source", style="dim")
    for key, value in config.model_dump(mode="json").items():
        table.add_row(key, str(value), "config" if key in config.model_fields_set else "default")
    console.print(table)
    console.print("[green]OK configuration is valid[/green]")


@app.command()
def version():
    """Show version information"""
    console.print("\n[bold cyan]Stable-Limit SDE Lab[/bold cyan]")
    console.print(f"Version: {__version__}")
    console.print("License: MIT\n")


if __name__ == "__main__":
    app()
