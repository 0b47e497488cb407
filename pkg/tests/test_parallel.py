"""Tests for synchronous data-parallel training."""

from __future__ import annotations

import numpy as np
import pytest

from matscale.exceptions import ConfigError
from matscale.loss import LossWeights
from matscale.models.factory import build_model
from matscale.training import TrainConfig, train
from matscale.training.parallel import (
    DataParallelStepper,
    average_gradients,
    check_parallel_config,
    train_data_parallel,
)
from matscale.training.trainer import batch_gradients


def _trained(model_config, split, config):
    model = build_model(model_config)
    record, _ = train(model, split, config)
    return model, record


@pytest.mark.parametrize("workers", [2, 4])
def test_matches_serial_training(tiny_transformer_config, tiny_split, tiny_train_config, workers: int) -> None:
    serial_model, serial = _trained(tiny_transformer_config, tiny_split, tiny_train_config)
    parallel_config = tiny_train_config.model_copy(update={"workers": workers})
    parallel_model, parallel = _trained(tiny_transformer_config, tiny_split, parallel_config)

    serial_state, parallel_state = serial_model.state_arrays(), parallel_model.state_arrays()
    for name, values in serial_state.items():
        np.testing.assert_allclose(parallel_state[name], values, rtol=0, atol=1e-10, err_msg=name)
    for a, b in zip(serial.steps, parallel.steps, strict=True):
        assert b.train_total == pytest.approx(a.train_total, abs=1e-10)
        assert b.flops == a.flops


def test_uneven_last_batch(tiny_transformer_config, synthetic_records) -> None:
    """A 3-record batch split over 2 workers still gives the full-batch gradient."""
    records = synthetic_records[:3]
    model = build_model(tiny_transformer_config)
    stepper = DataParallelStepper(model, 2, LossWeights())
    try:
        combined = stepper.compute(records)
    finally:
        stepper.close()
    reference = batch_gradients(build_model(tiny_transformer_config), records, LossWeights())
    for g, ref in zip(combined.grads, reference.grads, strict=True):
        np.testing.assert_allclose(g, ref, rtol=0, atol=1e-12)
    assert combined.loss.total == pytest.approx(reference.loss.total, abs=1e-12)


def test_replicas_stay_in_sync(tiny_transformer_config, synthetic_records) -> None:
    model = build_model(tiny_transformer_config)
    stepper = DataParallelStepper(model, 2, LossWeights())
    try:
        for tensor in model.parameters():
            tensor.data[...] += 0.01
        stepper.sync()
        master = model.state_arrays()
        for state in stepper.replica_states():
            assert all(np.array_equal(state[k], master[k]) for k in master)
    finally:
        stepper.close()


def test_average_gradients_weights_by_shard_size(tiny_transformer_config, synthetic_records) -> None:
    model = build_model(tiny_transformer_config)
    a = batch_gradients(model, synthetic_records[:1], LossWeights())
    b = batch_gradients(model, synthetic_records[1:4], LossWeights())
    averaged = average_gradients([a, b], [1, 3])
    np.testing.assert_allclose(averaged.grads[0], 0.25 * a.grads[0] + 0.75 * b.grads[0])
    assert averaged.flops == a.flops + b.flops


@pytest.mark.parametrize(("batch_size", "workers"), [(4, 1), (6, 4)])
def test_invalid_worker_counts(batch_size: int, workers: int) -> None:
    with pytest.raises(ConfigError):
        check_parallel_config(TrainConfig(batch_size=batch_size, workers=workers))


def test_indivisible_batch_is_rejected_by_train(tiny_transformer_config, tiny_split) -> None:
    config = TrainConfig(batch_size=6, workers=4, epochs=1)
    with pytest.raises(ConfigError, match="divisible"):
        train(build_model(tiny_transformer_config), tiny_split, config)



def test_train_data_parallel_entry_point(tiny_transformer_config, tiny_split, tiny_train_config) -> None:
    model = build_model(tiny_transformer_config)
    config = tiny_train_config.model_copy(update={"workers": 2})
    record, checkpoint = train_data_parallel(model, tiny_split, config)
    assert record.status == "completed"
    assert len(record.steps) == 4
    assert checkpoint.step == 4


def test_train_data_parallel_needs_two_workers(tiny_transformer_config, tiny_split, tiny_train_config) -> None:
    with pytest.raises(ConfigError, match="at least 2 workers"):
        train_data_parallel(build_model(tiny_transformer_config), tiny_split, tiny_train_config)
