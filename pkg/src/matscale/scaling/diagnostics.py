"""Baselines and run-health checks used alongside scaling fits."""

from __future__ import annotations

import logging

from pydantic import BaseModel, ConfigDict

from matscale.config import build_config
from matscale.data.split import DatasetSplit
from matscale.data.stats import summary_stats
from matscale.loss import LossBreakdown, LossWeights
from matscale.models.baseline import BaselineModel
from matscale.models.config import BaselineMode, ModelConfig
from matscale.tensor import Engine
from matscale.training.records import RunRecord
from matscale.training.trainer import evaluate

logger = logging.getLogger(__name__)

DEGENERATE_TAG = "degenerate"
ANOMALOUS_TAG = "anomalous"


class BaselineReport(BaseModel):
    """Loss of a constant-prediction baseline on both sides of a split."""

    model_config = ConfigDict(frozen=True)

    mode: str
    train: LossBreakdown
    val: LossBreakdown | None = None


def evaluate_baseline(
    split: DatasetSplit,
    mode: BaselineMode = "mean_energy_zero_force",
    weights: LossWeights | None = None,
) -> BaselineReport:
    """Train and validation loss of a naive baseline fitted on ``split.train``.

    With zero predicted forces the force term is the mean over materials of
    each material's mean absolute force component; for materials of equal
    size this is the pooled mean absolute force component.
    """
    weights = weights or LossWeights()
    train_records = list(split.train)
    stats = summary_stats(train_records) if mode == "mean_energy_zero_force" else None
    config = build_config(ModelConfig, model_kind="baseline_mode", baseline_mode=mode)
    model = BaselineModel(Engine(), config, stats)
    val_records = list(split.val)
    report = BaselineReport(
        mode=mode,
        train=evaluate(model, train_records, weights),
        val=evaluate(model, val_records, weights) if val_records else None,
    )
    logger.info(f"Baseline {mode}: train {report.train.total:.6g}")
    return report


def detect_zero_force_collapse(record: RunRecord, baseline_force_term: float, rtol: float = 0.05) -> bool:
    """Whether a run's final validation force term sits at the zero-force level.

    A model that learns to predict vanishing forces reaches a loss plateau
    set by the zero-force baseline; such runs are tagged ``degenerate``.

    Args:
        record: Finished run with at least one validation event.
        baseline_force_term: Force term of the zero-force baseline on the
            same validation records.
        rtol: Relative tolerance of the comparison.
    """
    final = record.final_val
    if final is None or baseline_force_term <= 0:
        return False
    collapsed = abs(final.force_term - baseline_force_term) <= rtol * baseline_force_term
    if collapsed:
        logger.warning(
            f"Run {record.run_id} force term {final.force_term:.4g} matches the zero-force "
            f"baseline {baseline_force_term:.4g}"
        )
    return collapsed
