"""Tests for the optimization loop."""

from __future__ import annotations

import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pytest

from matscale.data.split import DatasetSplit, split
from matscale.data.synthetic import generate_synthetic
from matscale.exceptions import ContractError, NumericError
from matscale.loss import LossBreakdown, LossWeights
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model, count_params
from matscale.training import TrainConfig, evaluate, train
from matscale.training.checkpoint import load_checkpoint, restore_model
from matscale.training.inference import infer
from matscale.training.trainer import StepGradients, batch_gradients, fit_loop


def _run(model_config, split, train_config):
    model = build_model(model_config)
    return model, train(model, split, train_config)


class TestTrainLoop:
    """Step accounting, validation events and determinism."""

    def test_step_and_validation_counts(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        model, (record, checkpoint) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        assert [s.step for s in record.steps] == [0, 1, 2, 3]
        assert [s.epoch for s in record.steps] == [1, 1, 2, 2]
        assert [v.epoch for v in record.validations] == [1, 2]
        assert [s.val_total is not None for s in record.steps] == [False, True, False, True]
        assert checkpoint.step == 4
        assert record.status == "completed"

    def test_record_provenance(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        model, (record, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        assert record.dataset_size == 8
        assert record.n_params == count_params(model)
        assert record.model["d_model"] == 8
        assert record.train["batch_size"] == 4
        assert record.optimizer.startswith("adam")
        assert len(record.epoch_times) == 2

    def test_flops_accumulate(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        _, (record, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        flops = [s.flops for s in record.steps]
        assert all(b > a for a, b in zip(flops, flops[1:]))
        assert record.validations[-1].flops == record.total_flops

    def test_validation_does_not_count_flops(self, tiny_transformer_config, tiny_split) -> None:
        model = build_model(tiny_transformer_config)
        evaluate(model, tiny_split.val, LossWeights())
        assert model.engine.flops.total == 0

    def test_schedule_is_applied(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        _, (record, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        assert record.steps[0].lr == pytest.approx(0.2 * 6e-4)
        assert record.steps[1].lr == pytest.approx(6e-4)

    def test_deterministic(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        model_a, (a, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        model_b, (b, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        assert a.steps == b.steps
        assert a.validations == b.validations
        states_a, states_b = model_a.state_arrays(), model_b.state_arrays()
        assert all(np.array_equal(states_a[k], states_b[k]) for k in states_a)

    def test_seed_changes_batch_order(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        _, (a, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        other = tiny_train_config.model_copy(update={"seed": 1})
        _, (b, _) = _run(tiny_transformer_config, tiny_split, other)
        assert [s.train_total for s in a.steps] != [s.train_total for s in b.steps]

    def test_surrogate_trains(self, tiny_surrogate_config, tiny_split, tiny_train_config) -> None:
        _, (record, _) = _run(tiny_surrogate_config, tiny_split, tiny_train_config)
        assert len(record.steps) == 4
        assert all(math.isfinite(s.train_total) for s in record.steps)

    def test_on_epoch_callback(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        seen: list[int] = []
        model = build_model(tiny_transformer_config)
        train(model, tiny_split, tiny_train_config, on_epoch=lambda epoch, _: seen.append(epoch))
        assert seen == [1, 2]

    def test_empty_training_split(self, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        empty = DatasetSplit(train=[], val=tiny_split.val, meta=tiny_split.meta)
        with pytest.raises(ContractError, match="empty"):
            train(build_model(tiny_transformer_config), empty, tiny_train_config)


class TestOutputs:
    """Checkpoints and panels written during training."""

    def test_writes_checkpoints_and_panels(
        self, tmp_path: Path, tiny_transformer_config, tiny_split, tiny_train_config
    ) -> None:
        config = tiny_train_config.model_copy(update={"out_dir": tmp_path, "viz_period_epochs": 2})
        model = build_model(tiny_transformer_config)
        record, _ = train(model, tiny_split, config)
        assert (tmp_path / "checkpoint_epoch1.msck").exists()
        assert (tmp_path / "checkpoint_epoch2.msck").exists()
        assert "<svg" in (tmp_path / "viz_epoch2.svg").read_text()
        assert not (tmp_path / "viz_epoch1.svg").exists()
        final = load_checkpoint(tmp_path / "final.msck")
        assert final.run_record.steps == record.steps

    def test_csv_history(self, tmp_path: Path, tiny_transformer_config, tiny_split, tiny_train_config) -> None:
        _, (record, _) = _run(tiny_transformer_config, tiny_split, tiny_train_config)
        lines = record.write_csv(tmp_path / "run.csv").read_text().splitlines()
        assert lines[0].startswith("step,epoch,flops,lr")
        assert len(lines) == 5


class TestResume:
    """Continuing a run from one of its epoch checkpoints."""

    @pytest.fixture
    def four_epochs(self, tmp_path: Path, tiny_train_config) -> TrainConfig:
        return tiny_train_config.model_copy(update={"epochs": 4, "out_dir": tmp_path})

    def test_resume_matches_uninterrupted_run(
        self, tmp_path: Path, tiny_transformer_config, tiny_split, four_epochs
    ) -> None:
        model = build_model(tiny_transformer_config)
        full, _ = train(model, tiny_split, four_epochs)

        checkpoint = load_checkpoint(tmp_path / "checkpoint_epoch2.msck")
        assert checkpoint.step == 4
        resumed, _ = train(restore_model(checkpoint), tiny_split, four_epochs, resume=checkpoint)

        assert len(resumed.epoch_train_losses()) == 4
        assert resumed.epoch_train_losses() == full.epoch_train_losses()
        assert [s.step for s in resumed.steps] == list(range(8))
        assert resumed.validations == full.validations

    def test_resume_keeps_early_stopping_count(
        self, tmp_path: Path, tiny_transformer_config, tiny_split, four_epochs
    ) -> None:
        train(build_model(tiny_transformer_config), tiny_split, four_epochs)
        checkpoint = load_checkpoint(tmp_path / "checkpoint_epoch2.msck")
        first = checkpoint.run_record.validations[0]
        checkpoint.run_record.validations[0] = first.model_copy(
            update={"loss": first.loss.model_copy(update={"total": 0.0})}
        )

        config = four_epochs.model_copy(update={"early_stop_patience": 2, "out_dir": None})
        record, _ = train(restore_model(checkpoint), tiny_split, config, resume=checkpoint)

        assert record.status == "early_stopped"
        assert [v.epoch for v in record.validations] == [1, 2, 3]


class _NanStepper:
    """Reports a non-finite loss on the first batch."""

    def __init__(self, model) -> None:
        self.model = model
        self.closed = False

    def compute(self, records: Sequence) -> StepGradients:
        nan = float("nan")
        grads = [np.zeros(p.shape) for p in self.model.parameters()]
        return StepGradients(grads, LossBreakdown(total=nan, energy_term=nan, force_term=0.0, iso_term=0.0, aniso_term=0.0), 0)

    def sync(self) -> None:
        pass

    def close(self) -> None:
        self.closed = True


def test_non_finite_loss_aborts_with_diagnostic_checkpoint(
    tmp_path: Path, tiny_transformer_config, tiny_split, tiny_train_config
) -> None:
    model = build_model(tiny_transformer_config)
    stepper = _NanStepper(model)
    config = tiny_train_config.model_copy(update={"out_dir": tmp_path})
    with pytest.raises(NumericError) as exc_info:
        fit_loop(model, tiny_split, config, stepper)
    path = Path(exc_info.value.checkpoint_path)
    assert path == tmp_path / "diagnostic_step0.msck"
    assert load_checkpoint(path).run_record.status == "failed"
    assert stepper.closed


def test_batch_gradients_cover_every_parameter(tiny_transformer_config, synthetic_records) -> None:
    model = build_model(tiny_transformer_config)
    result = batch_gradients(model, synthetic_records[:3], LossWeights())
    assert [g.shape for g in result.grads] == [p.shape for p in model.parameters()]
    assert result.flops > 0
    assert all(p.grad is None for p in model.parameters())


@pytest.mark.slow
def test_transformer_overfits_eight_materials() -> None:
    """A 50k-parameter transformer memorizes 8 materials and fails on 8 unseen ones."""
    data = split(generate_synthetic(16, atoms_range=(2, 4), seed=3), 0.5, 0.5, seed=0)
    assert (data.n_train, data.n_val) == (8, 8)
    model = build_model(ModelConfig(d_model=64, n_layers=2, n_heads=4, d_ff=128, init_seed=0))
    assert count_params(model) >= 50_000

    config = TrainConfig(batch_size=2, epochs=500, max_lr=1e-3, val_period_epochs=50, viz_period_epochs=0)
    record, _ = train(model, data, config)

    losses = record.epoch_train_losses()
    assert losses[-1] < 0.01 * losses[0]
    final_train = evaluate(model, data.train, LossWeights()).total
    assert record.validations[-1].loss.total >= 10 * final_train
    energy_errors = [infer(model, material)[1]["energy"] for material in data.train]
    assert max(energy_errors) < 1e-2
