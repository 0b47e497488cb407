"""Process-level settings and logging configuration.

Handles environment variables and the logging setup shared by the CLI and
long-running experiments.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from matscale.exceptions import ConfigError, format_pydantic_errors

logger = logging.getLogger(__name__)


class Settings:
    """Settings read from the ``MATSCALE_*`` environment variables at construction."""

    def __init__(self) -> None:
        self.log_level = os.getenv("MATSCALE_LOG_LEVEL", "INFO")
        self.out_dir = Path(os.getenv("MATSCALE_OUT_DIR", "runs"))
        # Caps the manifest max_parallel of sweeps; None leaves it alone
        self.max_workers = self._get_int("MATSCALE_WORKERS", None)

    @staticmethod
    def _get_int(key: str, default: int | None) -> int | None:
        """Positive integer from ``key``, or ``default`` when unset or invalid."""
        value = os.getenv(key)
        if value:
            try:
                parsed = int(value)
                if parsed >= 1:
                    return parsed
            except ValueError:
                pass
            logger.warning(f"Invalid {key} environment variable: {value}. Using default: {default}")
        return default

    def __repr__(self) -> str:
        return (
            f"Settings(log_level={self.log_level!r}, out_dir={str(self.out_dir)!r}, "
            f"max_workers={self.max_workers})"
        )


def configure_logging(level: str = "INFO") -> None:
    """Install the root handler used by the CLI.

    Args:
        level: Level name; unknown names fall back to INFO.
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def get_settings() -> Settings:
    """Read settings from the current environment."""
    return Settings()


ConfigT = TypeVar("ConfigT", bound=BaseModel)


def build_config(
    model_cls: type[ConfigT], data: Mapping[str, Any] | None = None, **overrides: Any
) -> ConfigT:
    """Validate a configuration model, reporting failures as :class:`ConfigError`.

    Args:
        model_cls: Pydantic configuration class.
        data: Field values, typically parsed from a manifest or checkpoint.
        **overrides: Field values taking precedence over ``data``.

    Raises:
        ConfigError: If validation fails; ``field`` names the first offending field.
    """
    values = {**(data or {}), **overrides}
    try:
        return model_cls.model_validate(values)
    except ValidationError as e:
        message, details = format_pydantic_errors(e, prefix=f"Invalid {model_cls.__name__}")
        field = details[0]["field"] if details else None
        raise ConfigError(message, field=field, errors=details) from e
