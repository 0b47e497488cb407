"""Optimization loop, checkpoints and inference."""

from matscale.training.checkpoint import (
    Checkpoint,
    load_checkpoint,
    restore_model,
    save_checkpoint,
)
from matscale.training.config import TrainConfig
from matscale.training.inference import infer, infer_many, load_model
from matscale.training.optim import Adam, clip_gradients, global_norm
from matscale.training.parallel import train_data_parallel
from matscale.training.records import CSV_COLUMNS, RunRecord, StepLog, ValidationLog
from matscale.training.schedule import lr_at_step, warmup_steps
from matscale.training.trainer import TrainResult, evaluate, train

__all__ = [
    "Adam",
    "CSV_COLUMNS",
    "Checkpoint",
    "RunRecord",
    "StepLog",
    "TrainConfig",
    "TrainResult",
    "ValidationLog",
    "clip_gradients",
    "evaluate",
    "global_norm",
    "infer",
    "infer_many",
    "load_checkpoint",
    "load_model",
    "lr_at_step",
    "restore_model",
    "save_checkpoint",
    "train",
    "train_data_parallel",
    "warmup_steps",
]
