"""Shared pytest fixtures for the matscale test suite.

Fixtures are organized by category: engines, records, models and files.
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from matscale.data.loader import dump_jsonl
from matscale.data.records import MaterialRecord
from matscale.data.split import DatasetSplit, split
from matscale.data.synthetic import generate_synthetic
from matscale.models.config import ModelConfig
from matscale.tensor import Engine, PrecisionMode
from matscale.training.config import TrainConfig

# ============================================================================
# Engine Fixtures
# ============================================================================


@pytest.fixture
def engine() -> Engine:
    """64-bit engine."""
    return Engine(PrecisionMode.HIGH)


@pytest.fixture
def engine32() -> Engine:
    """32-bit engine."""
    return Engine(PrecisionMode.REDUCED)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# ============================================================================
# Record Fixtures
# ============================================================================


def make_record(
    n_atoms: int = 3,
    seed: int = 0,
    cell_length: float = 10.0,
    zero_forces: bool = False,
) -> MaterialRecord:
    """A record with random (not physical) labels in a cubic cell."""
    gen = np.random.default_rng(seed)
    cell = np.eye(3) * cell_length
    frac = gen.uniform(0.0, 1.0, size=(n_atoms, 3))
    stress = gen.normal(size=(3, 3))
    return MaterialRecord(
        atomic_numbers=gen.integers(1, 30, size=n_atoms),
        cell=cell,
        cart=frac @ cell,
        energy=float(gen.normal()),
        forces=np.zeros((n_atoms, 3)) if zero_forces else gen.normal(size=(n_atoms, 3)),
        stress=(stress + stress.T) / 2,
    )


@pytest.fixture
def record_factory() -> Callable[..., MaterialRecord]:
    """:func:`make_record` for tests that need several records."""
    return make_record


@pytest.fixture
def record() -> MaterialRecord:
    """A 3-atom record."""
    return make_record(3, seed=7)


@pytest.fixture
def synthetic_records() -> list[MaterialRecord]:
    """Ten small Lennard-Jones materials."""
    return generate_synthetic(10, atoms_range=(2, 4), seed=0)


# ============================================================================
# Model Fixtures
# ============================================================================


@pytest.fixture
def tiny_transformer_config() -> ModelConfig:
    return ModelConfig(d_model=8, n_layers=1, n_heads=2, d_ff=16, init_seed=0)


@pytest.fixture
def tiny_surrogate_config() -> ModelConfig:
    return ModelConfig(model_kind="invariant_surrogate", d_model=8, n_rbf=6, n_interactions=1, cutoff=5.0)


# ============================================================================
# Training Fixtures
# ============================================================================


@pytest.fixture
def tiny_split(synthetic_records: list[MaterialRecord]) -> DatasetSplit:
    """8 train and 2 validation records."""
    return split(synthetic_records, 0.8, 0.2, seed=0)


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    """Two epochs of two steps, validating every epoch, no output files."""
    return TrainConfig(batch_size=4, epochs=2, val_period_epochs=1, viz_period_epochs=0)


# ============================================================================
# File Fixtures
# ============================================================================


@pytest.fixture
def jsonl_file(tmp_path: Path, synthetic_records: list[MaterialRecord]) -> Path:
    """The synthetic records written as JSONL."""
    return dump_jsonl(synthetic_records, tmp_path / "materials.jsonl")
