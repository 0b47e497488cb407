"""Per-channel summary statistics of energies, forces and stresses."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from matscale.data.records import VOIGT_ORDER, MaterialRecord
from matscale.exceptions import ContractError

FORCE_CHANNELS = ("force_x", "force_y", "force_z")
STRESS_CHANNELS = ("stress_xx", "stress_yy", "stress_zz", "stress_yz", "stress_xz", "stress_xy")
CHANNELS = ("energy", *FORCE_CHANNELS, *STRESS_CHANNELS)


class ChannelStats(BaseModel):
    """Population mean and standard deviation of one property channel."""

    model_config = ConfigDict(frozen=True)

    mean: float
    std: float = Field(ge=0.0)
    count: int = Field(ge=1)


class SummaryStats(BaseModel):
    """Summary statistics keyed by channel name.

    Channels are ``energy``, ``force_x/y/z`` (one scalar per atom) and the six
    stress components in Voigt order (one scalar per record).
    """

    model_config = ConfigDict(frozen=True)

    channels: dict[str, ChannelStats]

    def __getitem__(self, channel: str) -> ChannelStats:
        return self.channels[channel]

    @property
    def energy_mean(self) -> float:
        return self.channels["energy"].mean

    @property
    def stress_mean(self) -> np.ndarray:
        """Mean stress as a symmetric 3 x 3 matrix."""
        matrix = np.zeros((3, 3))
        for channel, (i, j) in zip(STRESS_CHANNELS, VOIGT_ORDER, strict=True):
            matrix[i, j] = matrix[j, i] = self.channels[channel].mean
        return matrix

    def rows(self) -> list[tuple[str, float, float, int]]:
        return [(name, s.mean, s.std, s.count) for name, s in self.channels.items()]


def _channel(values: np.ndarray) -> ChannelStats:
    return ChannelStats(mean=float(np.mean(values)), std=float(np.std(values)), count=int(values.size))


def summary_stats(records: Iterable[MaterialRecord]) -> SummaryStats:
    """Population mean and std per channel.

    Raises:
        ContractError: If ``records`` is empty.

    Examples:
        >>> summary_stats([record_e1, record_e3])["energy"].mean
        2.0
    """
    records = list(records)
    if not records:
        raise ContractError("summary_stats needs at least one record")

    energies = np.array([r.energy for r in records], dtype=np.float64)
    forces = np.concatenate([r.forces for r in records], axis=0)
    voigt = np.stack([r.stress_voigt for r in records])

    channels = {"energy": _channel(energies)}
    for axis, name in enumerate(FORCE_CHANNELS):
        channels[name] = _channel(forces[:, axis])
    for column, name in enumerate(STRESS_CHANNELS):
        channels[name] = _channel(voigt[:, column])
    return SummaryStats(channels=channels)


def mean_abs_force_component(records: Iterable[MaterialRecord]) -> float:
    """Mean of |F| over every atom and Cartesian component."""
    forces = np.concatenate([r.forces for r in records], axis=0)
    return float(np.mean(np.abs(forces)))
