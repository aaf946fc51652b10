"""Command-line interface for maxwellgas."""

import json
import logging
from dataclasses import dataclass, replace

import click
from rich.console import Console
from rich.table import Table

from .config import load_config
from .errors import ConfigError, MaxwellGasError
from .log_config import configure_logging
from .runner import RunResult, emit_plot_data, run_scenario


@dataclass
class ModeCommand:
    """Configuration for a single scenario subcommand."""
    command_name: str                    # CLI command name
    description: str                     # Help text
    mode: str                            # Scenario mode the config must declare


MODE_COMMANDS = [
    ModeCommand(
        command_name="transport",
        description="Compute the transport moments and coefficient table",
        mode="transport",
    ),
    ModeCommand(
        command_name="fluid",
        description="Run the Dufour-extended Navier-Stokes solver",
        mode="fluid",
    ),
    ModeCommand(
        command_name="lattice",
        description="Run the lattice-gas Markov chain",
        mode="lattice",
    ),
    ModeCommand(
        command_name="verify",
        description="Run the invariant verification suite",
        mode="verify",
    ),
]


def _print_error(error: dict):
    click.echo(json.dumps(error, sort_keys=True))


def _summary_table(mode: str, result: RunResult) -> Table:
    if mode == "verify":
        table = Table("Check", "Status", "Value", "Tolerance")
        for check in result.summary.get("checks", []):
            status = "[green]pass[/green]" if check["passed"] else "[red]FAIL[/red]"
            table.add_row(check["name"], status, f"{check['value']:.3e}", f"{check['tolerance']:.1e}")
        return table

    table = Table("Quantity", "Value")
    summary = result.summary.get("table", {}) if mode == "transport" else result.summary
    for key, value in summary.items():
        if isinstance(value, float):
            table.add_row(key, f"{value:.12g}")
        elif isinstance(value, (int, str)):
            table.add_row(key, str(value))
    return table


def create_mode_command(spec: ModeCommand):
    """Factory function to create a scenario command from configuration.

    Generates a Click command that:
    1. Loads and validates the scenario config
    2. Runs it into the output directory
    3. Prints a summary table, or the error document on failure
    4. Exits with the error's exit code

    Args:
        spec: ModeCommand specifying command behavior

    Returns:
        Click command function
    """
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=True, dir_okay=False), help="Scenario JSON file.")
    @click.option("--out", "out_dir", default=".",
                  type=click.Path(file_okay=False, dir_okay=True, writable=True, resolve_path=True),
                  help="Directory to write artifacts into.")
    @click.option("--seed", type=int, default=None, help="Seed for the stochastic lattice mode.")
    @click.pass_context
    def command_func(ctx, config_path, out_dir, seed):
        try:
            config = load_config(config_path)
            if config.mode != spec.mode:
                raise ConfigError(f"mode: config declares '{config.mode}' but the '{spec.command_name}' command was run")
        except MaxwellGasError as e:
            _print_error(e.to_dict())
            ctx.exit(e.exit_code)
        if seed is not None:
            config = replace(config, seed=seed)

        result = run_scenario(config, out_dir, progress=ctx.obj.get("progress", False))
        if result.summary:
            Console().print(_summary_table(spec.mode, result))
        if result.exit_code != 0:
            _print_error(result.error)
            ctx.exit(result.exit_code)
        for path in result.artifacts:
            click.echo(f"Artifact saved to {path}", err=True)

    # Set command metadata for Click
    command_func.__name__ = spec.command_name.replace("-", "_")
    command_func.__doc__ = spec.description

    return command_func


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log debug detail to stderr.")
@click.option("-q", "--quiet", is_flag=True, help="Only log warnings and errors.")
@click.option("--progress/--no-progress", default=False, help="Show progress bars for long runs.")
@click.pass_context
def cli(ctx, verbose, quiet, progress):
    """Kinetic-theory transport, fluid and lattice-gas runs."""
    ctx.ensure_object(dict)
    ctx.obj["progress"] = progress
    if verbose:
        configure_logging(logging.DEBUG)
    elif quiet:
        configure_logging(logging.WARNING)


# Dynamically register all scenario commands from configuration
for mode_command in MODE_COMMANDS:
    cli.command(mode_command.command_name)(create_mode_command(mode_command))


@cli.command("plot-data")
@click.argument("run_dir", type=click.Path(file_okay=False))
@click.option("--field", "field_name", default="theta", help="Column to extract (e.g. rho, theta, N).")
@click.pass_context
def plot_data(ctx, run_dir, field_name):
    """Split a run's CSV into per-snapshot column files for plotting."""
    try:
        manifest = emit_plot_data(run_dir, field_name)
    except MaxwellGasError as e:
        _print_error(e.to_dict())
        ctx.exit(e.exit_code)
    table = Table("File", "t")
    for entry in manifest:
        table.add_row(entry["file"], f"{entry['t']:.6g}")
    Console().print(table)


if __name__ == "__main__":
    cli()
