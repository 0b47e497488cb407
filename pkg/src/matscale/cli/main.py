"""Main CLI entry point for matscale.

This module provides the main command-line interface using Click.
"""

from __future__ import annotations

from collections.abc import Sequence

import click

from matscale.__version__ import __version__
from matscale.cli import commands
from matscale.cli.options import CliConfig, config_from_params
from matscale.cli.utils import handle_cli_error
from matscale.config import configure_logging, get_settings


@click.group()
@click.version_option(version=__version__, prog_name="matscale")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default=None,
    help="Logging level (default: $MATSCALE_LOG_LEVEL or INFO).",
)
@click.pass_context
def cli(ctx: click.Context, log_level: str | None) -> None:
    """matscale: train atomistic models and measure their scaling laws.

    This tool provides commands for:
    - Generating synthetic materials and summarizing datasets
    - Training transformer and invariant models on energy, forces and stress
    - Sweeping data, model size and compute, and fitting power laws
    - Rendering predictions and scaling plots as SVG
    """
    ctx.ensure_object(dict)
    configure_logging(log_level or get_settings().log_level)


cli.add_command(commands.generate_command)
cli.add_command(commands.stats_command)
cli.add_command(commands.train_command)
cli.add_command(commands.sweep_command)
cli.add_command(commands.fit_command)
cli.add_command(commands.infer_command)
cli.add_command(commands.viz_command)


def parse_args(argv: Sequence[str]) -> CliConfig:
    """Parse a subcommand and its flags into a validated :class:`CliConfig`.

    Nothing is executed; this is the parsing half of a CLI invocation.

    Args:
        argv: Subcommand name followed by its flags.

    Raises:
        click.UsageError: If the subcommand is unknown or a flag is invalid;
            the message names the flag.
        ConfigError: If the flags parse but do not form a valid configuration.

    Examples:
        >>> config = parse_args(["train"])
        >>> (config.train.batch_size, config.train.epochs, config.train.max_lr)
        (32, 50, 0.0006)
    """
    if not argv:
        raise click.UsageError("Missing subcommand")
    name, rest = argv[0], list(argv[1:])
    command = cli.get_command(click.Context(cli), name)
    if command is None:
        raise click.UsageError(f"No such command '{name}'")
    with command.make_context(name, rest) as ctx:
        return config_from_params(name, ctx.params)


def main() -> None:
    """Main entry point for the CLI.

    This function is called by the console_scripts entry point.
    It wraps the CLI in error handling to provide consistent error messages.
    """
    try:
        cli()
    except Exception as e:
        handle_cli_error(e)


if __name__ == "__main__":
    main()
