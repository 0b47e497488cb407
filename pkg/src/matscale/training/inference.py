"""Single-pass prediction from a saved checkpoint."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

from matscale.data.records import MaterialRecord
from matscale.loss import error_metrics
from matscale.models.module import Model
from matscale.models.prediction import EFSPrediction
from matscale.tensor import Engine
from matscale.training.checkpoint import Checkpoint, load_checkpoint, restore_model

logger = logging.getLogger(__name__)


def load_model(checkpoint: Checkpoint | str | Path, engine: Engine | None = None) -> Model:
    """Model restored from a checkpoint object or file.

    Raises:
        CheckpointError: If the file cannot be read or its version differs.
    """
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    return restore_model(checkpoint, engine)


def infer(
    checkpoint: Checkpoint | str | Path | Model,
    material: MaterialRecord,
) -> tuple[EFSPrediction, dict[str, float]]:
    """One forward pass on ``material`` plus its error against the stored labels.

    Parameters are never modified and repeated calls give identical outputs.

    Returns:
        ``(prediction, metrics)`` where ``metrics`` holds the energy, force
        and stress mean absolute errors.

    Raises:
        CheckpointError: If the checkpoint cannot be loaded.
    """
    model = checkpoint if isinstance(checkpoint, Model) else load_model(checkpoint)
    with model.engine.flops.suspended():
        prediction = model.predict(material)
    return prediction, error_metrics(prediction, material)


def infer_many(
    checkpoint: Checkpoint | str | Path | Model,
    materials: Sequence[MaterialRecord],
    batch_size: int = 64,
) -> list[tuple[EFSPrediction, dict[str, float]]]:
    """:func:`infer` over many materials, restoring the model once."""
    model = checkpoint if isinstance(checkpoint, Model) else load_model(checkpoint)
    results = []
    with model.engine.flops.suspended():
        for start in range(0, len(materials), batch_size):
            group = list(materials[start : start + batch_size])
            for material, prediction in zip(group, model.predict_batch(group), strict=True):
                results.append((prediction, error_metrics(prediction, material)))
    logger.debug(f"Inferred {len(results)} materials")
    return results
