"""Tests for binary checkpoints and checkpoint inference."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest

from matscale.data.stats import summary_stats
from matscale.exceptions import CheckpointError
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model
from matscale.training import TrainConfig, train
from matscale.training.checkpoint import (
    MAGIC,
    capture,
    from_bytes,
    load_checkpoint,
    restore_model,
    restore_rng,
    save_checkpoint,
    to_bytes,
)
from matscale.training.inference import infer, infer_many, load_model
from matscale.training.records import RunRecord


@pytest.fixture
def trained(tiny_transformer_config, tiny_split, tiny_train_config):
    """A model after two short epochs and its final checkpoint."""
    model = build_model(tiny_transformer_config)
    _, checkpoint = train(model, tiny_split, tiny_train_config)
    return model, checkpoint


class TestEncoding:
    """Byte layout and error reporting."""

    def test_reencoding_is_byte_identical(self, trained) -> None:
        _, checkpoint = trained
        data = to_bytes(checkpoint)
        assert to_bytes(from_bytes(data)) == data

    def test_preamble(self, trained) -> None:
        data = to_bytes(trained[1])
        magic, version, header_len = struct.unpack_from("<4sIQ", data)
        assert magic == MAGIC
        assert version == 1
        assert data[16 : 16 + header_len].startswith(b"{")

    def test_optimizer_state_is_kept(self, trained) -> None:
        checkpoint = from_bytes(to_bytes(trained[1]))
        assert checkpoint.opt_t == 4
        assert len(checkpoint.opt_m) == len(checkpoint.params)
        assert checkpoint.step == 4
        assert checkpoint.run_record.steps[-1].step == 3

    def test_save_and_load(self, tmp_path: Path, trained) -> None:
        path = save_checkpoint(trained[1], tmp_path / "nested" / "final.msck")
        assert to_bytes(load_checkpoint(path)) == path.read_bytes()

    def test_bad_magic(self, trained) -> None:
        data = b"XXXX" + to_bytes(trained[1])[4:]
        with pytest.raises(CheckpointError, match="magic"):
            from_bytes(data)

    def test_unsupported_version(self, trained) -> None:
        data = to_bytes(trained[1])
        data = data[:4] + struct.pack("<I", 2) + data[8:]
        with pytest.raises(CheckpointError) as exc_info:
            from_bytes(data)
        assert exc_info.value.version == 2

    @pytest.mark.parametrize("keep", [3, -8])
    def test_truncated(self, trained, keep: int) -> None:
        with pytest.raises(CheckpointError, match="truncated"):
            from_bytes(to_bytes(trained[1])[:keep])

    def test_trailing_bytes(self, trained) -> None:
        with pytest.raises(CheckpointError, match="trailing"):
            from_bytes(to_bytes(trained[1]) + b"\x00" * 8)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(CheckpointError) as exc_info:
            load_checkpoint(tmp_path / "absent.msck")
        assert exc_info.value.file_path == str(tmp_path / "absent.msck")


class TestRestore:
    """Rebuilding models and RNG state."""

    def test_restored_model_predicts_identically(self, trained, synthetic_records) -> None:
        model, checkpoint = trained
        restored = restore_model(from_bytes(to_bytes(checkpoint)))
        for record in synthetic_records[:3]:
            expected, actual = model.predict(record), restored.predict(record)
            np.testing.assert_array_equal(actual.forces, expected.forces)
            assert actual.energy == expected.energy

    def test_parameter_mismatch(self, trained) -> None:
        checkpoint = from_bytes(to_bytes(trained[1]))
        checkpoint.params.pop(next(iter(checkpoint.params)))
        with pytest.raises(CheckpointError, match="do not match"):
            restore_model(checkpoint)

    def test_rng_continues_sequence(self, tiny_transformer_config) -> None:
        rng = np.random.default_rng(5)
        rng.random(3)
        checkpoint = capture(build_model(tiny_transformer_config), TrainConfig(), RunRecord(), rng=rng)
        restored = restore_rng(from_bytes(to_bytes(checkpoint)))
        assert restored.random() == rng.random()

    def test_baseline_round_trip(self, synthetic_records) -> None:
        stats = summary_stats(synthetic_records)
        config = ModelConfig(model_kind="baseline_mode")
        baseline = build_model(config, stats=stats)
        checkpoint = from_bytes(to_bytes(capture(baseline, TrainConfig(), RunRecord())))
        restored = restore_model(checkpoint)
        prediction = restored.predict(synthetic_records[0])
        assert prediction.energy == pytest.approx(stats.energy_mean, rel=1e-15)
        assert not np.any(prediction.forces)


class TestInference:
    """Single-pass predictions from checkpoints."""

    def test_infer_from_file(self, tmp_path: Path, trained, record) -> None:
        model, checkpoint = trained
        path = save_checkpoint(checkpoint, tmp_path / "final.msck")
        prediction, metrics = infer(path, record)
        assert prediction.forces.shape == (3, 3)
        assert set(metrics) == {"energy", "force", "stress"}
        assert prediction.energy == model.predict(record).energy

    def test_repeated_calls_are_identical(self, trained, record) -> None:
        model = load_model(trained[1])
        before = model.state_arrays()
        first, _ = infer(model, record)
        second, _ = infer(model, record)
        assert first.energy == second.energy
        np.testing.assert_array_equal(first.stress, second.stress)
        after = model.state_arrays()
        assert all(np.array_equal(before[k], after[k]) for k in before)
        assert model.engine.flops.total == 0

    def test_infer_many_matches_single(self, trained, synthetic_records) -> None:
        model = load_model(trained[1])
        results = infer_many(model, synthetic_records, batch_size=4)
        assert len(results) == len(synthetic_records)
        for record, (prediction, _) in zip(synthetic_records, results, strict=True):
            single, _ = infer(model, record)
            assert prediction.energy == pytest.approx(single.energy, abs=1e-10)
            np.testing.assert_allclose(prediction.forces, single.forces, rtol=0, atol=1e-10)
