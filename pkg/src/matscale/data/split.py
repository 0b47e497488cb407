"""Seeded train/validation splitting."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from matscale.data.records import MaterialRecord
from matscale.exceptions import ContractError

logger = logging.getLogger(__name__)


def round_half_away(value: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


class SplitMeta(BaseModel):
    """Provenance of a split."""

    model_config = ConfigDict(frozen=True)

    source: str = Field(description="Name of the source dataset.")
    seed: int
    train_fraction: float
    val_fraction: float
    n_source: int = Field(ge=0)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train and validation record collections.

    ``train`` and ``val`` are either lists of records or, for file-backed
    sources, dataset views that re-read their file on iteration. ``len(train)``
    is the dataset size D.
    """

    train: Sequence[MaterialRecord]
    val: Sequence[MaterialRecord]
    meta: SplitMeta
    train_indices: tuple[int, ...] = ()
    val_indices: tuple[int, ...] = ()

    @property
    def n_train(self) -> int:
        return len(self.train)

    @property
    def n_val(self) -> int:
        return len(self.val)


def split_sizes(n_records: int, train_fraction: float, val_fraction: float) -> tuple[int, int]:
    """Train and validation sizes for ``n_records`` under the rounding rule."""
    n_train = round_half_away(train_fraction * n_records)
    n_val = min(round_half_away(val_fraction * n_records), n_records - n_train)
    return n_train, n_val


def split(
    records: Sequence[MaterialRecord] | Any,
    train_fraction: float,
    val_fraction: float,
    seed: int,
    source_name: str = "records",
) -> DatasetSplit:
    """Shuffle ``records`` by ``seed`` and cut disjoint train/val subsets.

    Sizes are ``round(fraction * N)`` with ties rounded away from zero; the
    validation size is clipped so both subsets fit in the source.

    Args:
        records: Indexable record collection. Sources with a ``subset`` method
            (file-backed datasets, caches) are split into views of themselves.
        train_fraction: Fraction of records for training, in (0, 1].
        val_fraction: Fraction of records for validation, in (0, 1].
        seed: Seed for the permutation.
        source_name: Name recorded in the split metadata.

    Raises:
        ContractError: If a fraction lies outside (0, 1] or the fractions sum
            above 1.

    Examples:
        >>> s = split(records_10, 0.8, 0.2, seed=0)
        >>> (s.n_train, s.n_val)
        (8, 2)
    """
    for name, value in (("train_fraction", train_fraction), ("val_fraction", val_fraction)):
        if not 0.0 < value <= 1.0:
            raise ContractError(f"{name} must lie in (0, 1], got {value}", {"field": name})
    if train_fraction + val_fraction > 1.0 + 1e-12:
        raise ContractError(
            f"train_fraction + val_fraction must not exceed 1, got {train_fraction + val_fraction}",
            {"field": "val_fraction"},
        )

    n_records = len(records)
    n_train, n_val = split_sizes(n_records, train_fraction, val_fraction)
    order = np.random.default_rng(seed).permutation(n_records)
    train_idx = tuple(int(i) for i in order[:n_train])
    val_idx = tuple(int(i) for i in order[n_train : n_train + n_val])

    if hasattr(records, "subset"):
        train, val = records.subset(train_idx), records.subset(val_idx)
    else:
        train, val = [records[i] for i in train_idx], [records[i] for i in val_idx]

    meta = SplitMeta(
        source=getattr(records, "name", source_name),
        seed=seed,
        train_fraction=train_fraction,
        val_fraction=val_fraction,
        n_source=n_records,
    )
    logger.info(f"Split {n_records} records into {n_train} train / {n_val} val (seed={seed})")
    return DatasetSplit(train=train, val=val, meta=meta, train_indices=train_idx, val_indices=val_idx)
