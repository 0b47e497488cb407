"""Main library API for matscale.

This module provides a flat interface to the matscale library. It re-exports
the core operations and adds convenience functions for common workflows.

Quick Start:
    >>> from matscale import api
    >>>
    >>> # Generate materials and train a small transformer on them
    >>> records = api.generate_synthetic(256, seed=0)
    >>> result = api.train_on_records(records, ModelConfig(d_model=32), TrainConfig(epochs=5))
    >>>
    >>> # Run a sweep from a manifest and fit its power laws
    >>> runs, fits = api.sweep_and_fit("sweeps/data.yaml", "runs/data")

Common Use Cases:
    1. Load or generate data: `load_jsonl(path)`, `generate_synthetic(n)`
    2. Split it: `split(records, 0.8, 0.2, seed)`
    3. Train: `train_on_records(records, model_config, train_config)`
    4. Predict: `infer(checkpoint, material)`
    5. Measure scaling: `sweep_and_fit(manifest, out_dir)`
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

from matscale.data.loader import dump_jsonl, load_jsonl
from matscale.data.records import MaterialRecord
from matscale.data.split import split
from matscale.data.stats import summary_stats
from matscale.data.synthetic import generate_synthetic
from matscale.exceptions import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataLoadError,
    DimensionError,
    DomainError,
    GraphStateError,
    MatscaleError,
    NumericError,
)
from matscale.loss import LossBreakdown, LossWeights, combined_loss, error_metrics
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model
from matscale.models.prediction import EFSPrediction
from matscale.scaling.fit import fit_power_law
from matscale.scaling.io import FITS_FILE, load_manifest, write_fits
from matscale.scaling.pareto import pareto_frontier
from matscale.scaling.sweep import fit_sweep, run_sweep
from matscale.scaling.types import PowerLawFit, SweepSpec
from matscale.tensor import Engine
from matscale.training.config import TrainConfig
from matscale.training.inference import infer, load_model
from matscale.training.records import RunRecord
from matscale.training.trainer import TrainResult, train
from matscale.viz.loglog import emit_loglog_plot
from matscale.viz.panel import render_material_panel

logger = logging.getLogger(__name__)


def train_on_records(
    records: Sequence[MaterialRecord],
    model_config: ModelConfig,
    train_config: TrainConfig,
    train_fraction: float = 0.8,
    val_fraction: float = 0.2,
    split_seed: int = 0,
    run_id: str = "run",
) -> TrainResult:
    """Split ``records``, build a model and train it in one call.

    Args:
        records: Labelled materials.
        model_config: Architecture of the model to build.
        train_config: Optimization settings.
        train_fraction: Fraction of records for training.
        val_fraction: Fraction of records for validation.
        split_seed: Seed of the train/validation permutation.
        run_id: Identifier recorded in the run record.

    Returns:
        The run record and final checkpoint.
    """
    data_split = split(records, train_fraction, val_fraction, split_seed)
    stats = summary_stats(data_split.train) if model_config.model_kind == "baseline_mode" else None
    model = build_model(model_config, Engine(train_config.precision), stats)
    return train(model, data_split, train_config, run_id=run_id)


def sweep_and_fit(
    manifest: str | Path | SweepSpec,
    out_dir: str | Path | None = None,
) -> tuple[list[RunRecord], list[PowerLawFit]]:
    """Run a sweep and fit its axis.

    With ``out_dir`` the sweep artifacts and ``fits.json`` are written there.
    """
    spec = manifest if isinstance(manifest, SweepSpec) else load_manifest(manifest)
    runs = run_sweep(spec, out_dir)
    fits = fit_sweep(runs)
    if out_dir is not None:
        write_fits(fits, Path(out_dir) / FITS_FILE)
    return runs, fits


__all__ = [
    "CheckpointError",
    "ConfigError",
    "ContractError",
    "DataLoadError",
    "DimensionError",
    "DomainError",
    "EFSPrediction",
    "GraphStateError",
    "MatscaleError",
    "LossBreakdown",
    "LossWeights",
    "MaterialRecord",
    "ModelConfig",
    "NumericError",
    "PowerLawFit",
    "RunRecord",
    "SweepSpec",
    "TrainConfig",
    "TrainResult",
    "build_model",
    "combined_loss",
    "dump_jsonl",
    "emit_loglog_plot",
    "error_metrics",
    "fit_power_law",
    "fit_sweep",
    "generate_synthetic",
    "infer",
    "load_jsonl",
    "load_manifest",
    "load_model",
    "pareto_frontier",
    "render_material_panel",
    "run_sweep",
    "split",
    "sweep_and_fit",
    "train",
    "train_on_records",
]
