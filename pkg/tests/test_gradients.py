"""Analytic gradients against central finite differences (64-bit, h = 1e-6)."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from matscale.data.batching import collate
from matscale.data.records import MaterialRecord
from matscale.loss import LossWeights, batch_loss
from matscale.models.config import ModelConfig
from matscale.models.factory import build_model
from matscale.tensor import Engine, Tensor, layernorm, matmul, softmax

STEP = 1e-6
RTOL = 1e-5
ATOL = 1e-8


def numeric_gradient(f: Callable[[], float], array: np.ndarray, indices: list[tuple[int, ...]]) -> np.ndarray:
    """Central differences of ``f`` with respect to selected entries of ``array``."""
    grads = []
    for index in indices:
        original = array[index]
        array[index] = original + STEP
        plus = f()
        array[index] = original - STEP
        minus = f()
        array[index] = original
        grads.append((plus - minus) / (2 * STEP))
    return np.array(grads)


def check_function(
    build: Callable[[Engine, list[Tensor]], Tensor],
    arrays: list[np.ndarray],
) -> None:
    engine = Engine()
    leaves = [engine.tensor(a, requires_grad=True) for a in arrays]
    grads = engine.backward(build(engine, leaves))
    for leaf in leaves:
        indices = list(np.ndindex(leaf.shape))

        def evaluate() -> float:
            with engine.no_grad():
                return build(engine, leaves).item()

        numeric = numeric_gradient(evaluate, leaf.data, indices)
        analytic = np.array([grads[leaf][i] for i in indices])
        np.testing.assert_allclose(analytic, numeric, rtol=RTOL, atol=ATOL)


UNARY_CASES: dict[str, Callable[[Tensor], Tensor]] = {
    "exp": lambda x: x.exp(),
    "sin": lambda x: x.sin(),
    "cos": lambda x: x.cos(),
    "sqrt": lambda x: (x.square() + 1.0).sqrt(),
    "square": lambda x: x.square(),
    "sigmoid": lambda x: x.sigmoid(),
    "silu": lambda x: x.silu(),
    "abs": lambda x: (x + 5.0).abs(),
    "neg": lambda x: -x,
}


class TestElementwiseGradients:
    """Every differentiable primitive over several seeds."""

    @pytest.mark.parametrize("kind", sorted(UNARY_CASES))
    @pytest.mark.parametrize("seed", range(5))
    def test_unary(self, kind: str, seed: int) -> None:
        x = np.random.default_rng(seed).normal(size=(3, 4))
        weights = np.random.default_rng(seed + 100).normal(size=(3, 4))
        check_function(lambda e, t: (UNARY_CASES[kind](t[0]) * weights).sum(), [x])

    @pytest.mark.parametrize("seed", range(5))
    def test_binary_with_broadcasting(self, seed: int) -> None:
        gen = np.random.default_rng(seed)
        a = gen.normal(size=(3, 4))
        b = gen.normal(size=(4,))
        c = gen.uniform(1.0, 2.0, size=(3, 1))

        def build(engine: Engine, t: list[Tensor]) -> Tensor:
            return ((t[0] + t[1]) * t[0] - t[1] / t[2]).sum()

        check_function(build, [a, b, c])

    @pytest.mark.parametrize("seed", range(5))
    def test_reductions_and_movement(self, seed: int) -> None:
        x = np.random.default_rng(seed).normal(size=(2, 3, 4))
        w = np.random.default_rng(seed + 1).normal(size=(4, 3, 2))

        def build(engine: Engine, t: list[Tensor]) -> Tensor:
            moved = t[0].transpose(2, 1, 0).reshape(4, 3, 2)
            return (moved * w).sum() + t[0].mean(axis=1).square().sum()

        check_function(build, [x])


class TestCompositeGradients:
    """Matrix products and the normalization composites."""

    @pytest.mark.parametrize("seed", range(5))
    def test_matmul(self, seed: int) -> None:
        gen = np.random.default_rng(seed)
        a, b = gen.normal(size=(2, 3, 4)), gen.normal(size=(2, 4, 2))
        w = gen.normal(size=(2, 3, 2))
        check_function(lambda e, t: (matmul(t[0], t[1]) * w).sum(), [a, b])

    @pytest.mark.parametrize("seed", range(5))
    def test_softmax(self, seed: int) -> None:
        gen = np.random.default_rng(seed)
        x, w = gen.normal(size=(3, 5)), gen.normal(size=(3, 5))
        check_function(lambda e, t: (softmax(t[0], axis=-1) * w).sum(), [x])

    @pytest.mark.parametrize("seed", range(5))
    def test_layernorm(self, seed: int) -> None:
        gen = np.random.default_rng(seed)
        x, gain, bias = gen.normal(size=(3, 6)), gen.normal(size=(6,)), gen.normal(size=(6,))
        w = gen.normal(size=(3, 6))
        check_function(lambda e, t: (layernorm(t[0], t[1], t[2]) * w).sum(), [x, gain, bias])


class TestSecondOrder:
    """Gradients built with ``create_graph`` are differentiable."""

    def test_gradient_of_gradient_norm(self) -> None:
        x0 = np.array([0.3, -0.7, 1.1])

        def build(engine: Engine, t: list[Tensor]) -> Tensor:
            with engine.enable_grad():
                inner = (t[0].sin() * t[0]).sum()
                (g,) = engine.grad(inner, [t[0]], create_graph=True)
            return g.square().sum()

        check_function(build, [x0])

    def test_grad_keeps_graph_and_leaves_slots(self, engine: Engine) -> None:
        x = engine.tensor([1.0, 2.0], requires_grad=True)
        y = (x * x).sum()
        (g,) = engine.grad(y, [x])
        np.testing.assert_array_equal(g.data, [2.0, 4.0])
        assert x.grad is None
        grads = engine.backward(y)
        np.testing.assert_array_equal(grads[x], [2.0, 4.0])


def _param_indices(model, per_param: int, seed: int) -> list[tuple[Tensor, tuple[int, ...]]]:
    gen = np.random.default_rng(seed)
    picked = []
    for _, tensor in model.named_parameters():
        for _ in range(per_param):
            picked.append((tensor, tuple(int(gen.integers(0, s)) for s in tensor.shape)))
    return picked


def _check_model_loss(config: ModelConfig, records: list[MaterialRecord], seed: int) -> None:
    model = build_model(config, Engine())
    batch = collate(records)
    weights = LossWeights()
    loss, _ = batch_loss(model(batch, training=True), batch, weights)
    grads = model.engine.backward(loss)

    def evaluate() -> float:
        return batch_loss(model(batch, training=True), batch, weights)[0].item()

    for tensor, index in _param_indices(model, 2, seed):
        numeric = numeric_gradient(evaluate, tensor.data, [index])[0]
        analytic = grads[tensor][index] if tensor in grads else 0.0
        assert analytic == pytest.approx(numeric, rel=RTOL, abs=ATOL)


class TestModelGradients:
    """Gradients of the full training loss with respect to every parameter tensor."""

    @pytest.mark.parametrize("seed", range(3))
    def test_transformer_loss(self, seed: int, record_factory) -> None:
        config = ModelConfig(d_model=8, n_layers=2, n_heads=2, d_ff=12, init_seed=seed)
        records = [record_factory(3, seed=seed), record_factory(2, seed=seed + 50)]
        _check_model_loss(config, records, seed)

    def test_surrogate_loss(self, record_factory) -> None:
        config = ModelConfig(
            model_kind="invariant_surrogate", d_model=4, n_heads=1, n_rbf=4, n_interactions=1, cutoff=6.0
        )
        records = [record_factory(3, seed=3, cell_length=6.0)]
        _check_model_loss(config, records, 0)
