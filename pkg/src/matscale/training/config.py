"""Optimization settings for a single training run."""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from matscale.loss import LossWeights
from matscale.tensor import PrecisionMode


class TrainConfig(BaseModel):
    """Hyperparameters of the optimization loop.

    Attributes:
        batch_size: Materials per optimizer step.
        epochs: Passes over the training split.
        max_lr: Peak learning rate of the warmup/cosine schedule.
        grad_clip: Bound on the global gradient norm.
        val_period_epochs: Validate (and checkpoint) every this many epochs.
        viz_period_epochs: Write a prediction panel every this many epochs;
            0 disables visualization.
        precision: Engine precision; ``reduced`` stands in for mixed precision.
        workers: In-process data-parallel workers; must divide ``batch_size``.
        cache: Parse the dataset once and keep it in memory.
        seed: Seed of batch shuffling.
        loss_weights: Channel weights of the combined loss.
        early_stop_patience: Stop after this many validation events without a
            new best validation loss; ``None`` disables early stopping.
        adam_beta1, adam_beta2, adam_eps: Adaptive-moment optimizer constants.
        out_dir: Directory for checkpoints and panels; nothing is written
            when unset.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(default=32, ge=1)
    epochs: int = Field(default=50, ge=1)
    max_lr: float = Field(default=6e-4, gt=0.0)
    grad_clip: float = Field(default=100.0, gt=0.0)
    val_period_epochs: int = Field(default=2, ge=1)
    viz_period_epochs: int = Field(default=5, ge=0)
    precision: PrecisionMode = PrecisionMode.HIGH
    workers: int = Field(default=1, ge=1)
    cache: bool = False
    seed: int = 0
    loss_weights: LossWeights = Field(default_factory=LossWeights)
    early_stop_patience: int | None = Field(default=None, ge=1)
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    out_dir: Path | None = None

    def steps_per_epoch(self, n_train: int) -> int:
        """``ceil(n_train / batch_size)``."""
        return -(-n_train // self.batch_size)

    def total_steps(self, n_train: int) -> int:
        return self.epochs * self.steps_per_epoch(n_train)

    def optimizer_label(self) -> str:
        return f"adam(beta1={self.adam_beta1}, beta2={self.adam_beta2}, eps={self.adam_eps})"
