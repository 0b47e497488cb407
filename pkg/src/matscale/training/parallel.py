"""Synchronous data-parallel training on in-process worker threads.

Each worker owns a private :class:`~matscale.tensor.Engine` and a replica of
the model. Per step the batch is cut into contiguous shards, every worker
computes the mean-loss gradient of its shard, and the orchestrator averages
them weighted by shard size in fixed worker order. The master model takes the
optimizer step and its parameters are copied back into every replica.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from matscale.data.batching import shard
from matscale.data.records import MaterialRecord
from matscale.data.split import DatasetSplit
from matscale.exceptions import ConfigError
from matscale.loss import LossBreakdown, LossWeights
from matscale.models.factory import replicate
from matscale.models.module import Model
from matscale.tensor import Engine
from matscale.training.checkpoint import Checkpoint
from matscale.training.config import TrainConfig
from matscale.training.records import RunRecord
from matscale.training.trainer import StepGradients, TrainResult, batch_gradients, fit_loop

logger = logging.getLogger(__name__)


class Worker:
    """One worker context: a private engine and a model replica."""

    def __init__(self, index: int, master: Model, weights: LossWeights) -> None:
        self.index = index
        self.engine = Engine(master.engine.precision)
        self.model = replicate(master, self.engine)
        self.weights = weights

    def compute(self, records: Sequence[MaterialRecord]) -> StepGradients:
        return batch_gradients(self.model, records, self.weights)


def average_gradients(results: Sequence[StepGradients], sizes: Sequence[int]) -> StepGradients:
    """Shard-size weighted mean of worker results, summed in the given order.

    The weights make the result equal to the gradient of the mean loss over
    the whole batch. FLOPs are summed over workers.
    """
    total = sum(sizes)
    weights = [n / total for n in sizes]
    grads = [np.zeros_like(g) for g in results[0].grads]
    for w, result in zip(weights, results, strict=True):
        for acc, g in zip(grads, result.grads, strict=True):
            acc += w * g

    def mean_term(name: str) -> float:
        return sum(w * getattr(r.loss, name) for w, r in zip(weights, results, strict=True))

    loss = LossBreakdown(
        total=mean_term("total"),
        energy_term=mean_term("energy_term"),
        force_term=mean_term("force_term"),
        iso_term=mean_term("iso_term"),
        aniso_term=mean_term("aniso_term"),
    )
    return StepGradients(grads, loss, sum(r.flops for r in results))


class DataParallelStepper:
    """Gradient source that fans each batch out to ``n_workers`` threads."""

    def __init__(self, master: Model, n_workers: int, weights: LossWeights) -> None:
        self.master = master
        self.workers = [Worker(k, master, weights) for k in range(n_workers)]
        self.pool = ThreadPoolExecutor(max_workers=n_workers, thread_name_prefix="matscale-worker")

    def compute(self, records: Sequence[MaterialRecord]) -> StepGradients:
        shards = shard(records, len(self.workers))
        futures = [
            (len(part), self.pool.submit(worker.compute, part))
            for worker, part in zip(self.workers, shards, strict=True)
            if part
        ]
        # Barrier: collect in worker order so the reduction order is fixed
        results = [future.result() for _, future in futures]
        return average_gradients(results, [n for n, _ in futures])

    def sync(self) -> None:
        state = self.master.state_arrays()
        for worker in self.workers:
            worker.model.load_state_arrays(state)

    def replica_states(self) -> list[dict[str, np.ndarray]]:
        return [worker.model.state_arrays() for worker in self.workers]

    def close(self) -> None:
        self.pool.shutdown(wait=True)


def check_parallel_config(config: TrainConfig) -> None:
    """Validate the worker count against the batch size.

    Raises:
        ConfigError: If fewer than two workers are requested or the batch
            size is not divisible by the worker count.
    """
    if config.workers < 2:
        raise ConfigError(
            f"Data-parallel training needs at least 2 workers, got {config.workers}", field="workers"
        )
    if config.batch_size % config.workers:
        raise ConfigError(
            f"batch_size {config.batch_size} is not divisible by workers {config.workers}",
            field="batch_size",
        )


def train_data_parallel(
    model: Model,
    split: DatasetSplit,
    config: TrainConfig,
    run_id: str = "run",
    resume: Checkpoint | None = None,
    on_epoch: Callable[[int, RunRecord], None] | None = None,
) -> TrainResult:
    """Train with ``config.workers`` synchronous workers.

    Raises:
        ConfigError: If the worker count does not divide the batch size.
    """
    check_parallel_config(config)
    logger.info(f"Data-parallel training with {config.workers} workers")
    stepper = DataParallelStepper(model, config.workers, config.loss_weights)
    return fit_loop(model, split, config, stepper, run_id, resume, on_epoch)
