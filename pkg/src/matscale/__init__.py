"""matscale: atomistic models for energy, forces and stress, and their scaling laws."""

from matscale.__version__ import __version__

# Main API functions from api.py
from matscale.api import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataLoadError,
    DimensionError,
    DomainError,
    EFSPrediction,
    GraphStateError,
    MatscaleError,
    LossBreakdown,
    LossWeights,
    MaterialRecord,
    ModelConfig,
    NumericError,
    PowerLawFit,
    RunRecord,
    SweepSpec,
    TrainConfig,
    TrainResult,
    build_model,
    combined_loss,
    dump_jsonl,
    emit_loglog_plot,
    error_metrics,
    fit_power_law,
    fit_sweep,
    generate_synthetic,
    infer,
    load_jsonl,
    load_manifest,
    load_model,
    pareto_frontier,
    render_material_panel,
    run_sweep,
    split,
    sweep_and_fit,
    train,
    train_on_records,
)

# Additional utilities not in api.py
from matscale.exceptions import format_pydantic_errors
from matscale.tensor import Engine, PrecisionMode, Tensor

__all__ = [
    "__version__",
    # Data
    "MaterialRecord",
    "dump_jsonl",
    "generate_synthetic",
    "load_jsonl",
    "split",
    # Models and loss
    "Engine",
    "EFSPrediction",
    "LossBreakdown",
    "LossWeights",
    "ModelConfig",
    "PrecisionMode",
    "Tensor",
    "build_model",
    "combined_loss",
    "error_metrics",
    # Training
    "RunRecord",
    "TrainConfig",
    "TrainResult",
    "infer",
    "load_model",
    "train",
    "train_on_records",
    # Scaling
    "PowerLawFit",
    "SweepSpec",
    "fit_power_law",
    "fit_sweep",
    "load_manifest",
    "pareto_frontier",
    "run_sweep",
    "sweep_and_fit",
    # Plots
    "emit_loglog_plot",
    "render_material_panel",
    # Exceptions
    "CheckpointError",
    "ConfigError",
    "ContractError",
    "DataLoadError",
    "DimensionError",
    "DomainError",
    "GraphStateError",
    "MatscaleError",
    "NumericError",
    "format_pydantic_errors",
]
