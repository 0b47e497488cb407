"""Pre-norm self-attention encoder over the atoms of each material."""

from __future__ import annotations

import numpy as np

from matscale.data.batching import Batch
from matscale.models.config import ModelConfig
from matscale.models.embedding import AtomEmbedding
from matscale.models.heads import EFSHeads
from matscale.models.layers import MLP, LayerNorm, Linear
from matscale.models.module import Model, Module
from matscale.models.prediction import EFSBatch
from matscale.tensor import Engine, Tensor, matmul, softmax

MASKED_LOGIT = -1e9


class MultiHeadSelfAttention(Module):
    """Scaled dot-product attention of every atom over every atom.

    ``last_attention`` keeps the weights of the latest call, shaped
    ``(B, heads, N, N)``, for inspection.
    """

    def __init__(self, engine: Engine, d_model: int, n_heads: int, rng: np.random.Generator) -> None:
        super().__init__(engine)
        self.d_model = d_model
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.query = self.add_child("query", Linear(engine, d_model, d_model, rng))
        self.key = self.add_child("key", Linear(engine, d_model, d_model, rng))
        self.value = self.add_child("value", Linear(engine, d_model, d_model, rng))
        self.output = self.add_child("output", Linear(engine, d_model, d_model, rng))
        self.last_attention: np.ndarray | None = None

    def _split_heads(self, x: Tensor, batch: int, atoms: int) -> Tensor:
        return x.reshape(batch, atoms, self.n_heads, self.head_dim).transpose(0, 2, 1, 3)

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        batch, atoms, _ = x.shape
        q = self._split_heads(self.query(x), batch, atoms)
        k = self._split_heads(self.key(x), batch, atoms)
        v = self._split_heads(self.value(x), batch, atoms)

        scores = matmul(q, k.swap_last()) * (1.0 / np.sqrt(self.head_dim))
        if mask is not None:
            bias = (1.0 - np.asarray(mask, dtype=np.float64))[:, None, None, :] * MASKED_LOGIT
            scores = scores + bias
        weights = softmax(scores, axis=-1)
        self.last_attention = weights.numpy()

        attended = matmul(weights, v).transpose(0, 2, 1, 3).reshape(batch, atoms, self.d_model)
        return self.output(attended)


class EncoderBlock(Module):
    """``x + attn(norm(x))`` followed by ``x + ffn(norm(x))``."""

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__(engine)
        d = config.d_model
        self.attn_norm = self.add_child("attn_norm", LayerNorm(engine, d, config.layernorm_eps))
        self.attention = self.add_child(
            "attention", MultiHeadSelfAttention(engine, d, config.n_heads, rng)
        )
        self.ffn_norm = self.add_child("ffn_norm", LayerNorm(engine, d, config.layernorm_eps))
        self.ffn = self.add_child("ffn", MLP(engine, d, config.d_ff, d, rng))

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        x = x + self.attention(self.attn_norm(x), mask)
        return x + self.ffn(self.ffn_norm(x))


class Encoder(Module):
    """Stack of ``n_layers`` encoder blocks with no final normalization."""

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__(engine)
        self.blocks = [
            self.add_child(f"block{i}", EncoderBlock(engine, config, rng)) for i in range(config.n_layers)
        ]

    def __call__(self, embeddings: Tensor, mask: np.ndarray | None = None) -> Tensor:
        return transformer_forward(self, embeddings, mask)


def transformer_forward(encoder: Encoder, embeddings: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Run the encoder on ``(B, N, d_model)`` or ``(N, d_model)`` embeddings.

    With zero blocks the embeddings are returned unchanged.
    """
    unbatched = embeddings.ndim == 2
    x = embeddings.reshape(1, *embeddings.shape) if unbatched else embeddings
    if mask is not None:
        mask = np.asarray(mask).reshape(x.shape[:2])
    for block in encoder.blocks:
        x = block(x, mask)
    if unbatched and encoder.blocks:
        return x.reshape(*embeddings.shape)
    return x if encoder.blocks else embeddings


class AtomisticTransformer(Model):
    """Embedding pathways, self-attention encoder and direct EFS heads.

    Forces come from a per-atom head rather than the energy gradient, so
    nothing constrains them to be conservative or rotation-equivariant.
    """

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator | None = None) -> None:
        super().__init__(engine, config)
        rng = rng if rng is not None else np.random.default_rng(config.init_seed)
        self.embedding = self.add_child("embedding", AtomEmbedding(engine, config, rng))
        self.encoder = self.add_child("encoder", Encoder(engine, config, rng))
        self.heads = self.add_child("heads", EFSHeads(engine, config, rng))

    def forward(self, batch: Batch, training: bool = False) -> EFSBatch:
        latent = self.embedding(batch.numbers, batch.cart, batch.frac, batch.mask)
        latent = self.encoder(latent, batch.mask)
        return self.heads(latent, batch.mask)
