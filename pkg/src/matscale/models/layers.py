"""Dense building blocks: linear maps, two-layer SiLU networks, layer norm."""

from __future__ import annotations

import numpy as np

from matscale.models.module import Module, uniform_init
from matscale.tensor import Engine, Tensor, layernorm, matmul


class Linear(Module):
    """Affine map over the last axis, ``y = x @ W + b``.

    Inputs of any rank are flattened to 2-D for the product, so the FLOP
    count is ``2 * rows * d_in * d_out``.
    """

    def __init__(self, engine: Engine, d_in: int, d_out: int, rng: np.random.Generator) -> None:
        super().__init__(engine)
        self.d_in = d_in
        self.d_out = d_out
        self.weight = self.add_param("weight", uniform_init(rng, (d_in, d_out), d_in))
        self.bias = self.add_param("bias", np.zeros(d_out))

    def __call__(self, x: Tensor) -> Tensor:
        lead = x.shape[:-1]
        flat = x.reshape(-1, self.d_in) if x.ndim != 2 else x
        out = matmul(flat, self.weight) + self.bias
        return out.reshape(*lead, self.d_out) if x.ndim != 2 else out


class MLP(Module):
    """Two-layer network with a SiLU between the layers."""

    def __init__(
        self,
        engine: Engine,
        d_in: int,
        d_hidden: int,
        d_out: int,
        rng: np.random.Generator,
    ) -> None:
        super().__init__(engine)
        self.first = self.add_child("first", Linear(engine, d_in, d_hidden, rng))
        self.second = self.add_child("second", Linear(engine, d_hidden, d_out, rng))

    def __call__(self, x: Tensor) -> Tensor:
        return self.second(self.first(x).silu())


class LayerNorm(Module):
    def __init__(self, engine: Engine, width: int, eps: float = 1e-5) -> None:
        super().__init__(engine)
        self.eps = eps
        self.gain = self.add_param("gain", np.ones(width))
        self.bias = self.add_param("bias", np.zeros(width))

    def __call__(self, x: Tensor) -> Tensor:
        return layernorm(x, self.gain, self.bias, self.eps)
