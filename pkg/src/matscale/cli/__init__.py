"""Command-line interface for matscale.

This package provides the generate, stats, train, sweep, fit, infer and viz
commands.
"""

from matscale.cli.main import main, parse_args

__all__ = ["main", "parse_args"]
