"""Parameter containers for models built on the tensor engine."""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from typing import TypeVar

import numpy as np

from matscale.data.batching import Batch, collate
from matscale.data.records import MaterialRecord
from matscale.exceptions import ContractError
from matscale.models.config import ModelConfig
from matscale.models.prediction import EFSBatch, EFSPrediction
from matscale.tensor import Engine, Tensor

ModuleT = TypeVar("ModuleT", bound="Module")


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    """Samples from U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)


class Module:
    """A named tree of parameters.

    Parameters and child modules are registered in declaration order, which
    fixes the order used by optimizers and checkpoints. Parameters flagged as
    embeddings are excluded from the non-embedding parameter count.
    """

    def __init__(self, engine: Engine) -> None:
        self.engine = engine
        self._params: dict[str, Tensor] = {}
        self._embedding_params: set[str] = set()
        self._children: dict[str, Module] = {}

    def add_param(self, name: str, values: np.ndarray, embedding: bool = False) -> Tensor:
        if name in self._params or name in self._children:
            raise ContractError(f"Duplicate parameter name '{name}'")
        tensor = self.engine.tensor(values, requires_grad=True, name=name)
        self._params[name] = tensor
        if embedding:
            self._embedding_params.add(name)
        return tensor

    def add_child(self, name: str, module: ModuleT) -> ModuleT:
        if name in self._params or name in self._children:
            raise ContractError(f"Duplicate child name '{name}'")
        self._children[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        """Yield ``(dotted_name, tensor)`` in declaration order, depth first."""
        for name, tensor in self._params.items():
            yield prefix + name, tensor
        for name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{name}.")

    def embedding_names(self, prefix: str = "") -> set[str]:
        names = {prefix + name for name in self._embedding_params}
        for name, child in self._children.items():
            names |= child.embedding_names(f"{prefix}{name}.")
        return names

    def parameters(self) -> list[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Copies of every parameter array, keyed by dotted name."""
        return {name: tensor.data.copy() for name, tensor in self.named_parameters()}

    def load_state_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Overwrite parameter values in place.

        Raises:
            ContractError: If names or shapes do not match this module.
        """
        named = dict(self.named_parameters())
        if set(named) != set(arrays):
            missing = sorted(set(named) - set(arrays))
            extra = sorted(set(arrays) - set(named))
            raise ContractError(
                f"Parameter names do not match (missing={missing}, unexpected={extra})"
            )
        for name, tensor in named.items():
            values = np.asarray(arrays[name])
            if values.shape != tensor.shape:
                raise ContractError(
                    f"Parameter '{name}' has shape {tensor.shape}, got {values.shape}"
                )
            tensor.data[...] = values

    def zero_(self) -> None:
        """Set every parameter to zero."""
        for tensor in self.parameters():
            tensor.data[...] = 0.0

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()


class Model(Module):
    """Base class of every energy/force/stress model.

    Subclasses implement :meth:`forward` on padded batches. ``training``
    asks gradient-force models to keep their force graph differentiable so
    that a loss on forces can be back-propagated to the parameters.
    """

    def __init__(self, engine: Engine, config: ModelConfig) -> None:
        super().__init__(engine)
        self.config = config

    def forward(self, batch: Batch, training: bool = False) -> EFSBatch:
        raise NotImplementedError

    def __call__(self, batch: Batch, training: bool = False) -> EFSBatch:
        return self.forward(batch, training=training)

    def predict_batch(self, records: Sequence[MaterialRecord]) -> list[EFSPrediction]:
        """Predictions for ``records`` without building a parameter graph."""
        batch = collate(records)
        with self.engine.no_grad():
            out = self.forward(batch, training=False)
        return out.unbatch(batch.n_atoms)

    def predict(self, record: MaterialRecord) -> EFSPrediction:
        return self.predict_batch([record])[0]
