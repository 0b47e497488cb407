"""Naive constant-prediction baselines."""

from __future__ import annotations

import numpy as np

from matscale.data.batching import Batch
from matscale.data.records import MaterialRecord
from matscale.data.stats import SummaryStats
from matscale.exceptions import ConfigError
from matscale.models.config import ModelConfig
from matscale.models.module import Model
from matscale.models.prediction import EFSBatch, EFSPrediction
from matscale.tensor import Engine

BASELINE_MODES = ("mean_energy_zero_force", "all_zero")


def _constants(mode: str, stats: SummaryStats | None) -> tuple[float, np.ndarray]:
    if mode == "all_zero":
        return 0.0, np.zeros((3, 3))
    if mode == "mean_energy_zero_force":
        if stats is None:
            raise ConfigError("mean_energy_zero_force needs training summary statistics", field="stats")
        return stats.energy_mean, stats.stress_mean
    raise ConfigError(
        f"Unknown baseline mode '{mode}' (expected one of {', '.join(BASELINE_MODES)})",
        field="baseline_mode",
    )


def baseline_predict(mode: str, stats: SummaryStats | None, material: MaterialRecord) -> EFSPrediction:
    """Constant prediction that ignores atomic positions.

    ``mean_energy_zero_force`` predicts the training mean energy and mean
    stress with zero forces; ``all_zero`` predicts zeros everywhere.

    Raises:
        ConfigError: For an unknown mode, or a mean mode without statistics.

    Examples:
        >>> baseline_predict("all_zero", None, record).energy
        0.0
    """
    energy, stress = _constants(mode, stats)
    return EFSPrediction(energy=energy, forces=np.zeros((material.n_atoms, 3)), stress=stress)


class BaselineModel(Model):
    """Parameter-free model wrapping :func:`baseline_predict` for batches."""

    def __init__(
        self,
        engine: Engine,
        config: ModelConfig,
        stats: SummaryStats | None = None,
        constants: tuple[float, np.ndarray] | None = None,
    ) -> None:
        super().__init__(engine, config)
        self.mode = config.baseline_mode
        self.energy_value, self.stress_value = constants or _constants(self.mode, stats)

    def forward(self, batch: Batch, training: bool = False) -> EFSBatch:
        engine = self.engine
        return EFSBatch(
            energy=engine.constant(np.full(batch.size, self.energy_value)),
            forces=engine.constant(np.zeros((batch.size, batch.max_atoms, 3))),
            stress=engine.constant(np.broadcast_to(self.stress_value, (batch.size, 3, 3)).copy()),
        )
