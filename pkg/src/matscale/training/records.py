"""Per-run training history: the joint record of D, P, C and L."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from matscale.loss import LossBreakdown

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "step",
    "epoch",
    "flops",
    "lr",
    "train_total",
    "train_energy",
    "train_force",
    "train_iso",
    "train_aniso",
    "val_total",
)

RunStatus = Literal["completed", "early_stopped", "failed"]


class StepLog(BaseModel):
    """One optimizer step.

    ``flops`` is the cumulative count C after the step. ``val_total`` is set
    on the last step of a validation epoch.
    """

    model_config = ConfigDict(frozen=True)

    step: int = Field(ge=0)
    epoch: int = Field(ge=1)
    flops: int = Field(ge=0)
    lr: float
    train_total: float
    train_energy: float
    train_force: float
    train_iso: float
    train_aniso: float
    val_total: float | None = None

    def csv_row(self) -> list[str]:
        values: list[Any] = [self.step, self.epoch, self.flops]
        values += [
            repr(x)
            for x in (
                self.lr,
                self.train_total,
                self.train_energy,
                self.train_force,
                self.train_iso,
                self.train_aniso,
            )
        ]
        values.append("" if self.val_total is None else repr(self.val_total))
        return [str(v) for v in values]


class ValidationLog(BaseModel):
    """Validation loss measured after ``epoch`` at cumulative compute ``flops``."""

    model_config = ConfigDict(frozen=True)

    step: int
    epoch: int
    flops: int
    loss: LossBreakdown


class RunRecord(BaseModel):
    """History and provenance of one training run.

    Attributes:
        run_id: Identifier, unique within a sweep.
        model: Snapshot of the model configuration.
        train: Snapshot of the training configuration.
        optimizer: Optimizer description.
        n_params: Non-embedding parameter count P.
        n_params_total: Parameter count including the embedding table.
        param_memory_bytes: Parameter plus optimizer-moment storage.
        dataset_size: Training materials D.
        steps: One entry per optimizer step.
        validations: One entry per validation event.
        epoch_times: Wall seconds per epoch.
        wall_time: Wall seconds of the whole run.
        status: How the run ended.
        failure: Reason of a failed run.
        axis, axis_value: Sweep coordinates, when part of a sweep.
        seed: Seed of the run.
        tags: Free labels such as ``degenerate`` or ``anomalous``.
    """

    run_id: str = "run"
    model: dict[str, Any] = Field(default_factory=dict)
    train: dict[str, Any] = Field(default_factory=dict)
    optimizer: str = ""
    n_params: int = Field(default=0, ge=0)
    n_params_total: int = Field(default=0, ge=0)
    param_memory_bytes: int = Field(default=0, ge=0)
    dataset_size: int = Field(default=0, ge=0)
    steps: list[StepLog] = Field(default_factory=list)
    validations: list[ValidationLog] = Field(default_factory=list)
    epoch_times: list[float] = Field(default_factory=list)
    wall_time: float = 0.0
    status: RunStatus = "completed"
    failure: str | None = None
    axis: str | None = None
    axis_value: float | None = None
    seed: int = 0
    tags: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_monotonic(self) -> RunRecord:
        for prev, cur in zip(self.steps, self.steps[1:]):
            if cur.step <= prev.step:
                raise ValueError(f"steps must be strictly increasing ({prev.step} then {cur.step})")
            if cur.flops < prev.flops:
                raise ValueError(f"flops must be non-decreasing at step {cur.step}")
        return self

    def append_step(self, log: StepLog) -> None:
        """Add a step, keeping steps increasing and C non-decreasing.

        Raises:
            ValueError: If ``log`` would break either ordering.
        """
        if self.steps:
            last = self.steps[-1]
            if log.step <= last.step:
                raise ValueError(f"step {log.step} does not follow {last.step}")
            if log.flops < last.flops:
                raise ValueError(f"flops decreased at step {log.step}")
        self.steps.append(log)

    @property
    def total_flops(self) -> int:
        return self.steps[-1].flops if self.steps else 0

    @property
    def best_val(self) -> float | None:
        if not self.validations:
            return None
        return min(v.loss.total for v in self.validations)

    @property
    def final_val(self) -> LossBreakdown | None:
        return self.validations[-1].loss if self.validations else None

    @property
    def final_train(self) -> float | None:
        return self.steps[-1].train_total if self.steps else None

    def epoch_train_losses(self) -> list[float]:
        """Mean train total per epoch, in epoch order."""
        by_epoch: dict[int, list[float]] = {}
        for log in self.steps:
            by_epoch.setdefault(log.epoch, []).append(log.train_total)
        return [sum(v) / len(v) for _, v in sorted(by_epoch.items())]

    def write_csv(self, path: str | Path) -> Path:
        """Write the step history with the fixed column header."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for log in self.steps:
                writer.writerow(log.csv_row())
        logger.debug(f"Wrote {len(self.steps)} steps to {path}")
        return path


def read_csv(path: str | Path) -> list[StepLog]:
    """Parse a step-history CSV written by :meth:`RunRecord.write_csv`."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = []
        for row in reader:
            val = row.pop("val_total")
            rows.append(StepLog.model_validate({**row, "val_total": float(val) if val else None}))
        return rows
