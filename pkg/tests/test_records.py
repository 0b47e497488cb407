"""Tests for run records and the step-history CSV."""

from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from matscale.loss import LossBreakdown
from matscale.training.records import CSV_COLUMNS, RunRecord, StepLog, ValidationLog, read_csv


def _step(step: int, flops: int, epoch: int = 1, val_total: float | None = None) -> StepLog:
    return StepLog(
        step=step,
        epoch=epoch,
        flops=flops,
        lr=1e-4,
        train_total=1.0 / (step + 1),
        train_energy=0.1,
        train_force=0.2,
        train_iso=0.3,
        train_aniso=0.4,
        val_total=val_total,
    )


def _validation(epoch: int, total: float) -> ValidationLog:
    loss = LossBreakdown(total=total, energy_term=total, force_term=0.0, iso_term=0.0, aniso_term=0.0)
    return ValidationLog(step=epoch, epoch=epoch, flops=100 * epoch, loss=loss)


class TestOrdering:
    """Steps increase and cumulative compute never decreases."""

    def test_append_in_order(self) -> None:
        record = RunRecord()
        record.append_step(_step(0, 10))
        record.append_step(_step(1, 10))
        assert record.total_flops == 10

    @pytest.mark.parametrize(("step", "flops"), [(0, 20), (1, 5)])
    def test_append_out_of_order(self, step: int, flops: int) -> None:
        record = RunRecord(steps=[_step(0, 10)])
        with pytest.raises(ValueError):
            record.append_step(_step(step, flops))

    def test_validator_rejects_decreasing_flops(self) -> None:
        with pytest.raises(ValidationError, match="non-decreasing"):
            RunRecord(steps=[_step(0, 10), _step(1, 9)])

    def test_validator_rejects_repeated_step(self) -> None:
        with pytest.raises(ValidationError, match="strictly increasing"):
            RunRecord(steps=[_step(2, 10), _step(2, 11)])


class TestSummaries:
    def test_empty_record(self) -> None:
        record = RunRecord()
        assert record.total_flops == 0
        assert record.best_val is None
        assert record.final_val is None
        assert record.final_train is None

    def test_best_and_final_validation(self) -> None:
        record = RunRecord(validations=[_validation(1, 0.5), _validation(2, 0.2), _validation(3, 0.3)])
        assert record.best_val == 0.2
        assert record.final_val is not None and record.final_val.total == 0.3

    def test_epoch_train_losses(self) -> None:
        steps = [_step(0, 1, epoch=1), _step(1, 2, epoch=1), _step(2, 3, epoch=2)]
        record = RunRecord(steps=steps)
        assert record.epoch_train_losses() == pytest.approx([(1.0 + 0.5) / 2, 1.0 / 3])
        assert record.final_train == pytest.approx(1.0 / 3)


def test_csv_round_trip(tmp_path: Path) -> None:
    steps = [_step(0, 100), _step(1, 200, val_total=0.125), _step(2, 300, epoch=2)]
    path = RunRecord(steps=steps).write_csv(tmp_path / "out" / "run.csv")
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[2].endswith(",0.125")
    assert lines[1].endswith(",")
    assert read_csv(path) == steps
