"""Sweep manifests and the JSON artifacts of sweeps and fits."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import yaml

from matscale.config import build_config
from matscale.exceptions import DataLoadError
from matscale.scaling.types import PowerLawFit, SweepSpec
from matscale.training.records import RunRecord
from matscale.validator import validate_manifest_dict

logger = logging.getLogger(__name__)

RUNS_FILE = "runs.json"
FITS_FILE = "fits.json"


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise DataLoadError(f"File not found: {path}", original_error=e, file_path=str(path)) from e
    except OSError as e:
        raise DataLoadError(f"Cannot read {path}: {e}", original_error=e, file_path=str(path)) from e


def load_manifest(path: str | Path) -> SweepSpec:
    """Read a YAML or JSON sweep manifest and validate it.

    The manifest is checked against the sweep manifest schema first, then
    built into a :class:`SweepSpec`.

    Raises:
        DataLoadError: If the file cannot be read or parsed.
        ConfigError: If the manifest is structurally or semantically invalid.
    """
    path = Path(path)
    text = _read_text(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise DataLoadError(f"Invalid manifest syntax in {path}: {e}", original_error=e, file_path=str(path)) from e
    validate_manifest_dict(data, str(path))
    spec = build_config(SweepSpec, data)
    logger.info(f"Loaded sweep manifest {path} ({spec.axis} axis, {len(spec.grid)} grid values)")
    return spec


def _dump(payload: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_runs(records: Sequence[RunRecord], path: str | Path) -> Path:
    """Write every run record to ``runs.json``-style JSON."""
    out = _dump({"runs": [r.model_dump(mode="json") for r in records]}, Path(path))
    logger.info(f"Wrote {len(records)} run records to {out}")
    return out


def read_runs(path: str | Path) -> list[RunRecord]:
    """Read run records written by :func:`write_runs`.

    Raises:
        DataLoadError: If the file is missing or malformed.
    """
    path = Path(path)
    try:
        payload = json.loads(_read_text(path))
        return [RunRecord.model_validate(r) for r in payload["runs"]]
    except DataLoadError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataLoadError(f"Invalid run records in {path}: {e}", original_error=e, file_path=str(path)) from e


def write_fits(fits: Sequence[PowerLawFit], path: str | Path) -> Path:
    """Write fitted laws with their points and exclusions; output is deterministic."""
    out = _dump({"fits": [f.model_dump(mode="json") for f in fits]}, Path(path))
    logger.info(f"Wrote {len(fits)} fits to {out}")
    return out


def read_fits(path: str | Path) -> list[PowerLawFit]:
    """Read fits written by :func:`write_fits`.

    Raises:
        DataLoadError: If the file is missing or malformed.
    """
    path = Path(path)
    try:
        payload = json.loads(_read_text(path))
        return [PowerLawFit.model_validate(f) for f in payload["fits"]]
    except DataLoadError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataLoadError(f"Invalid fits in {path}: {e}", original_error=e, file_path=str(path)) from e
