"""Padded mini-batches of variable-size materials."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from matscale.data.geometry import minimum_image_shifts
from matscale.data.records import MaterialRecord
from matscale.exceptions import ConfigError, ContractError


@dataclass(frozen=True)
class Batch:
    """Zero-padded arrays for ``B`` materials of up to ``N`` atoms.

    ``mask[b, i]`` is 1.0 for real atoms and 0.0 for padding; padded atoms
    carry atomic number 0, zero coordinates and zero labels. ``shifts`` holds
    the integer minimum-image lattice shifts for every atom pair.
    """

    records: tuple[MaterialRecord, ...]
    numbers: np.ndarray
    cart: np.ndarray
    frac: np.ndarray
    cell: np.ndarray
    mask: np.ndarray
    shifts: np.ndarray
    energy: np.ndarray
    forces: np.ndarray
    stress: np.ndarray

    @property
    def size(self) -> int:
        return len(self.records)

    @property
    def max_atoms(self) -> int:
        return int(self.numbers.shape[1])

    @property
    def n_atoms(self) -> np.ndarray:
        return self.mask.sum(axis=1)


def collate(records: Sequence[MaterialRecord]) -> Batch:
    """Pad ``records`` to the largest atom count among them.

    Raises:
        ContractError: If ``records`` is empty.
    """
    if not records:
        raise ContractError("Cannot collate an empty batch")
    size = len(records)
    width = max(r.n_atoms for r in records)
    numbers = np.zeros((size, width), dtype=np.int64)
    cart = np.zeros((size, width, 3))
    frac = np.zeros((size, width, 3))
    mask = np.zeros((size, width))
    shifts = np.zeros((size, width, width, 3))
    forces = np.zeros((size, width, 3))
    for b, record in enumerate(records):
        n = record.n_atoms
        numbers[b, :n] = record.atomic_numbers
        cart[b, :n] = record.cart_positions
        frac[b, :n] = record.frac_positions
        mask[b, :n] = 1.0
        shifts[b, :n, :n] = minimum_image_shifts(record.cart_positions, record.cell)
        forces[b, :n] = record.forces
    return Batch(
        records=tuple(records),
        numbers=numbers,
        cart=cart,
        frac=frac,
        cell=np.stack([r.cell for r in records]),
        mask=mask,
        shifts=shifts,
        energy=np.array([r.energy for r in records]),
        forces=forces,
        stress=np.stack([r.stress for r in records]),
    )


def iter_batches(
    records: Sequence[MaterialRecord],
    batch_size: int,
    rng: np.random.Generator | None = None,
) -> Iterator[list[MaterialRecord]]:
    """Yield consecutive record groups of ``batch_size`` (the last may be short).

    With ``rng`` the order is a fresh permutation drawn from it.
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}", field="batch_size")
    order = np.arange(len(records)) if rng is None else rng.permutation(len(records))
    for start in range(0, len(records), batch_size):
        yield [records[int(i)] for i in order[start : start + batch_size]]


def shard(records: Sequence[MaterialRecord], n_shards: int) -> list[list[MaterialRecord]]:
    """Split a batch into ``n_shards`` contiguous shards of near-equal size.

    Shard sizes differ by at most one, larger shards first. Shards may be
    empty when the batch is shorter than ``n_shards``.
    """
    if n_shards < 1:
        raise ConfigError(f"n_shards must be >= 1, got {n_shards}", field="workers")
    base, extra = divmod(len(records), n_shards)
    shards, start = [], 0
    for k in range(n_shards):
        stop = start + base + (1 if k < extra else 0)
        shards.append(list(records[start:stop]))
        start = stop
    return shards
