"""Sweep manifests, fitted power laws and frontier points."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from matscale.exceptions import ContractError
from matscale.models.config import ModelConfig
from matscale.training.config import TrainConfig

Axis = Literal["data", "params", "compute"]
AXIS_SYMBOLS: dict[str, str] = {"data": "D", "params": "P", "compute": "C"}
LossKind = Literal["best_val", "final_val", "frontier_val", "frontier_train"]


class DatasetSpec(BaseModel):
    """Source of a sweep's records: a JSONL file or a synthetic dataset."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Path | None = None
    n_materials: int = Field(default=1000, ge=1)
    atoms_min: int = Field(default=2, ge=1)
    atoms_max: int = Field(default=8, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_range(self) -> DatasetSpec:
        if self.atoms_min > self.atoms_max:
            raise ValueError(f"atoms_min ({self.atoms_min}) exceeds atoms_max ({self.atoms_max})")
        return self


class SweepSpec(BaseModel):
    """One-axis scaling sweep.

    Attributes:
        name: Label used in logs.
        axis: ``data`` varies the training-set size D with ``model`` fixed;
            ``params`` and ``compute`` train each model configuration of the
            grid on the full training split. Compute fits use every
            validation point of every run.
        grid: Record counts for the data axis, model configurations otherwise.
        model: Fixed model of a data sweep.
        train: Fixed optimization settings of every cell.
        dataset: Where the records come from.
        train_fraction, val_fraction: Split of the source; the validation set
            is shared by every cell.
        repetitions: Runs per grid value.
        seed: Base seed of training and initialization.
        seed_policy: ``increment`` gives repetition r the seed ``seed + r``;
            ``fixed`` reuses ``seed``.
        max_parallel: Cells trained concurrently.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "sweep"
    axis: Axis
    grid: list[int | ModelConfig] = Field(min_length=1)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    train_fraction: float = Field(default=0.8, gt=0.0, le=1.0)
    val_fraction: float = Field(default=0.2, gt=0.0, le=1.0)
    repetitions: int = Field(default=1, ge=1)
    seed: int = 0
    seed_policy: Literal["increment", "fixed"] = "increment"
    max_parallel: int = Field(default=1, ge=1)

    @field_validator("grid", mode="before")
    @classmethod
    def _coerce_grid(cls, v: object) -> object:
        # Record counts may be written as 1e3 in manifests
        if isinstance(v, list):
            return [int(x) if isinstance(x, float) and x.is_integer() else x for x in v]
        return v

    @model_validator(mode="after")
    def _check_grid(self) -> SweepSpec:
        if self.axis == "data":
            if not all(isinstance(v, int) for v in self.grid):
                raise ValueError("data sweeps take record counts as grid values")
            counts = [int(v) for v in self.grid]  # type: ignore[arg-type]
            if any(c < 1 for c in counts):
                raise ValueError("grid record counts must be positive")
            if any(b <= a for a, b in zip(counts, counts[1:])):
                raise ValueError("grid values must be strictly increasing")
        elif not all(isinstance(v, ModelConfig) for v in self.grid):
            raise ValueError(f"{self.axis} sweeps take model configurations as grid values")
        if self.train_fraction + self.val_fraction > 1.0 + 1e-12:
            raise ValueError("train_fraction + val_fraction must not exceed 1")
        return self

    def seeds(self) -> list[int]:
        if self.seed_policy == "fixed":
            return [self.seed] * self.repetitions
        return [self.seed + r for r in range(self.repetitions)]


class PowerLawFit(BaseModel):
    """``L = alpha * N**(-beta)`` fitted in log space.

    Attributes:
        alpha: Prefactor (positive).
        beta: Exponent; positive means the loss falls as N grows.
        r_squared: Coefficient of determination of the log-space fit.
        axis: Scaling axis symbol (``D``, ``P``, ``C`` or any label).
        n_points: Points used by the fit.
        points: The ``(N, L)`` pairs that were fitted.
        loss_kind: Which loss the points carry.
        exclusions: Run identifiers left out of the fit, e.g. flagged anomalies.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0.0)
    beta: float
    r_squared: float = Field(ge=0.0, le=1.0)
    axis: str = "N"
    n_points: int = Field(ge=3)
    points: list[tuple[float, float]] = Field(default_factory=list)
    loss_kind: LossKind = "best_val"
    exclusions: list[str] = Field(default_factory=list)

    def predict(self, n: float) -> float:
        """Loss predicted at axis value ``n``."""
        return self.alpha * n ** (-self.beta)

    def solve_for(self, loss: float) -> float:
        """Axis value at which the fitted law reaches ``loss``.

        Raises:
            ContractError: If the law is flat (``beta == 0``) or ``loss`` is
                not positive.
        """
        if self.beta == 0:
            raise ContractError("A flat power law cannot be inverted")
        if loss <= 0:
            raise ContractError(f"Target loss must be positive, got {loss}")
        return math.exp((math.log(self.alpha) - math.log(loss)) / self.beta)

    def legend(self) -> str:
        return f"L = {self.alpha:.4g} * {self.axis}^(-{self.beta:.4g}), R^2 = {self.r_squared:.3f}"


class FrontierPoint(BaseModel):
    """A (compute, loss) observation and where it came from."""

    model_config = ConfigDict(frozen=True)

    flops: float
    loss: float
    run_id: str = ""
    step: int = 0


class FitComparison(BaseModel):
    """Exponent and loss ratios of two fits at a shared axis value."""

    model_config = ConfigDict(frozen=True)

    exponent_ratio: float
    loss_ratio: float
    at: float
