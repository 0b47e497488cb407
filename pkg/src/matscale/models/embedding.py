"""Atom embeddings: element table, coordinate networks and index encoding."""

from __future__ import annotations

from typing import Any

import numpy as np

from matscale.exceptions import ConfigError, DomainError
from matscale.models.config import ModelConfig
from matscale.models.layers import MLP
from matscale.models.module import Module, uniform_init
from matscale.tensor import Engine, Tensor
from matscale.tensor.ops import take

INDEX_ENCODING_BASE = 10000.0


def sinusoidal_encoding(atom_index: int | np.ndarray, d_model: int) -> np.ndarray:
    """Sine/cosine encoding of atom positions in the input order.

    ``pe[2i] = sin(idx / 10000^(2i/d_model))`` and ``pe[2i+1] = cos(...)``.

    Args:
        atom_index: Non-negative index, or an array of indices.
        d_model: Even encoding width.

    Returns:
        Array of shape ``(d_model,)``, or ``index_shape + (d_model,)``.

    Raises:
        ConfigError: If ``d_model`` is odd or not positive.

    Examples:
        >>> sinusoidal_encoding(0, 4).tolist()
        [0.0, 1.0, 0.0, 1.0]
    """
    if d_model < 2 or d_model % 2:
        raise ConfigError(f"d_model must be a positive even number, got {d_model}", field="d_model")
    index = np.asarray(atom_index, dtype=np.float64)
    if np.any(index < 0):
        raise ConfigError("atom_index must be non-negative", field="atom_index")
    rates = INDEX_ENCODING_BASE ** (-np.arange(0, d_model, 2, dtype=np.float64) / d_model)
    phase = index[..., None] * rates
    encoding = np.empty(index.shape + (d_model,))
    encoding[..., 0::2] = np.sin(phase)
    encoding[..., 1::2] = np.cos(phase)
    return encoding


class AtomEmbedding(Module):
    """Sum of four per-atom pathways.

    1. learned element embedding, one row per atomic number;
    2. two-layer SiLU network on Cartesian coordinates;
    3. a separate two-layer SiLU network on fractional coordinates;
    4. sinusoidal encoding of the atom index (optional).
    """

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__(engine)
        self.config = config
        rows, width = config.max_num_elements, config.d_model
        self.table = self.add_param(
            "element_table", uniform_init(rng, (rows, width), rows), embedding=True
        )
        self.cart_mlp = self.add_child("cart_mlp", MLP(engine, 3, width, width, rng))
        self.frac_mlp = self.add_child("frac_mlp", MLP(engine, 3, width, width, rng))

    def __call__(
        self,
        numbers: np.ndarray,
        cart: Any,
        frac: Any,
        mask: np.ndarray | None = None,
    ) -> Tensor:
        return embed_atoms(self, numbers, cart, frac, mask)


def _as_tensor(engine: Engine, value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else engine.constant(value)


def check_atomic_numbers(numbers: np.ndarray, max_num_elements: int, mask: np.ndarray | None = None) -> None:
    """Raise :class:`DomainError` if a real atom has no row in the element table."""
    numbers = np.asarray(numbers)
    real = numbers if mask is None else numbers[np.asarray(mask) > 0]
    bad = real[(real < 1) | (real >= max_num_elements)]
    if bad.size:
        raise DomainError(
            f"Atomic number {int(bad[0])} outside [1, {max_num_elements - 1}]",
            {"atomic_number": int(bad[0]), "max_num_elements": max_num_elements},
        )


def embed_atoms(
    embedding: AtomEmbedding,
    numbers: np.ndarray,
    cart: Any,
    frac: Any,
    mask: np.ndarray | None = None,
) -> Tensor:
    """Embed atoms as the sum of the element, coordinate and index pathways.

    Args:
        embedding: Module holding the learned pathways.
        numbers: Atomic numbers, shape ``(n,)`` or ``(B, N)`` (0 marks padding).
        cart: Cartesian positions, ``numbers.shape + (3,)``; array or tensor.
        frac: Fractional positions, same shape as ``cart``.
        mask: Optional ``numbers``-shaped 1/0 mask of real atoms.

    Returns:
        Tensor of shape ``numbers.shape + (d_model,)``.

    Raises:
        DomainError: If a real atom's number is outside ``[1, max_num_elements - 1]``.
    """
    config = embedding.config
    engine = embedding.engine
    numbers = np.asarray(numbers, dtype=np.int64)
    check_atomic_numbers(numbers, config.max_num_elements, mask)

    out = take(embedding.table, numbers, axis=0)
    out = out + embedding.cart_mlp(_as_tensor(engine, cart))
    out = out + embedding.frac_mlp(_as_tensor(engine, frac))
    if config.use_index_encoding:
        index = np.broadcast_to(np.arange(numbers.shape[-1]), numbers.shape)
        out = out + engine.constant(sinusoidal_encoding(index, config.d_model))
    return out
