"""Tests for seeded train/validation splitting."""

from __future__ import annotations

from pathlib import Path

import pytest

from matscale.data.loader import JsonlDataset
from matscale.data.split import round_half_away, split, split_sizes
from matscale.exceptions import ContractError


def test_default_fractions(synthetic_records) -> None:
    result = split(synthetic_records, 0.8, 0.2, seed=0)
    assert (result.n_train, result.n_val) == (8, 2)
    assert result.meta.n_source == 10
    assert result.meta.source == "records"


def test_subsets_are_disjoint(synthetic_records) -> None:
    result = split(synthetic_records, 0.6, 0.3, seed=5)
    assert not set(result.train_indices) & set(result.val_indices)
    assert [synthetic_records[i] for i in result.train_indices] == list(result.train)


def test_same_seed_same_split(synthetic_records) -> None:
    a = split(synthetic_records, 0.8, 0.2, seed=11)
    b = split(synthetic_records, 0.8, 0.2, seed=11)
    c = split(synthetic_records, 0.8, 0.2, seed=12)
    assert a.train_indices == b.train_indices
    assert a.train_indices != c.train_indices


@pytest.mark.parametrize(
    ("n", "train", "val", "expected"),
    [
        (10, 0.8, 0.2, (8, 2)),
        (5, 0.5, 0.5, (3, 2)),
        (3, 0.5, 0.5, (2, 1)),
        (7, 1.0, 0.1, (7, 0)),
    ],
)
def test_sizes_round_half_away(n: int, train: float, val: float, expected: tuple[int, int]) -> None:
    assert split_sizes(n, train, val) == expected


def test_round_half_away() -> None:
    assert round_half_away(2.5) == 3
    assert round_half_away(-2.5) == -3
    assert round_half_away(2.4) == 2


@pytest.mark.parametrize(("train", "val"), [(0.0, 0.2), (0.8, 0.0), (1.2, 0.1), (0.8, -0.1)])
def test_fraction_out_of_range(synthetic_records, train: float, val: float) -> None:
    with pytest.raises(ContractError):
        split(synthetic_records, train, val, seed=0)


def test_fractions_sum_above_one(synthetic_records) -> None:
    with pytest.raises(ContractError, match="must not exceed 1"):
        split(synthetic_records, 0.7, 0.4, seed=0)


def test_file_backed_split_stays_file_backed(jsonl_file: Path, synthetic_records) -> None:
    result = split(JsonlDataset(jsonl_file), 0.8, 0.2, seed=0)
    assert isinstance(result.train, JsonlDataset)
    assert result.meta.source == "materials.jsonl"
    assert list(result.val) == [synthetic_records[i] for i in result.val_indices]
