"""Shared utilities for CLI commands."""

from __future__ import annotations

import sys
from typing import NoReturn

import click

from matscale.exceptions import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataLoadError,
    GraphStateError,
    NumericError,
)

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def exit_code_for(error: Exception) -> int:
    """Exit status for an exception: 2 usage, 3 data, 4 numeric, 1 otherwise."""
    if isinstance(error, (ConfigError, click.UsageError)):
        return EXIT_USAGE
    if isinstance(error, (ContractError, DataLoadError, CheckpointError, FileNotFoundError)):
        return EXIT_DATA
    if isinstance(error, (NumericError, GraphStateError)):
        return EXIT_NUMERIC
    return EXIT_FAILURE


def handle_cli_error(error: Exception, file_path: str | None = None) -> NoReturn:
    """Print a short diagnostic for ``error`` and exit with its status code.

    Args:
        error: The exception that occurred.
        file_path: Optional file path that caused the error.
    """
    file_info = f" ({file_path})" if file_path else ""

    if isinstance(error, ConfigError):
        click.echo(f"Error: Invalid configuration{file_info}", err=True)
        click.echo(f"  {error.message}", err=True)
        if error.field and not error.errors:
            click.echo(f"  Field: {error.field}", err=True)

    elif isinstance(error, DataLoadError):
        click.echo(f"Error: Failed to load data{file_info}", err=True)
        click.echo(f"  {error.message}", err=True)
        if error.original_error:
            click.echo(f"  Details: {error.original_error}", err=True)

    elif isinstance(error, CheckpointError):
        click.echo(f"Error: Checkpoint problem{file_info}", err=True)
        click.echo(f"  {error.message}", err=True)

    elif isinstance(error, ContractError):
        click.echo(f"Error: {error.message}{file_info}", err=True)

    elif isinstance(error, NumericError):
        click.echo("Error: Numerical failure", err=True)
        click.echo(f"  {error.message}", err=True)
        if error.checkpoint_path:
            click.echo(f"  Diagnostic checkpoint: {error.checkpoint_path}", err=True)

    elif isinstance(error, GraphStateError):
        click.echo(f"Error: {error.message}", err=True)

    elif isinstance(error, FileNotFoundError):
        click.echo(f"Error: File not found{file_info}", err=True)
        click.echo(f"  {error}", err=True)

    else:
        click.echo(f"Error: Unexpected error occurred{file_info}", err=True)
        click.echo(f"  {type(error).__name__}: {error}", err=True)

    sys.exit(exit_code_for(error))


def echo_table(rows: list[tuple[str, ...]], headers: tuple[str, ...]) -> None:
    """Print left-aligned columns."""
    widths = [max(len(str(v)) for v in column) for column in zip(headers, *rows)]
    for row in (headers, *rows):
        click.echo("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())
