"""Output heads mapping encoder latents to energy, forces and stress."""

from __future__ import annotations

import numpy as np

from matscale.models.config import ModelConfig
from matscale.models.layers import MLP
from matscale.models.module import Module
from matscale.models.prediction import VOIGT_TO_MATRIX_INDEX, EFSBatch
from matscale.tensor import Engine, Tensor
from matscale.tensor.ops import take


def masked_mean(latent: Tensor, mask: np.ndarray) -> Tensor:
    """Mean over real atoms: ``(B, N, d)`` -> ``(B, d)``."""
    mask = np.asarray(mask, dtype=np.float64)
    counts = np.maximum(mask.sum(axis=1, keepdims=True), 1.0)
    return (latent * mask[..., None]).sum(axis=1) * (1.0 / counts)


class EFSHeads(Module):
    """Two-layer SiLU heads.

    The energy and stress heads read the mean-pooled latent; the force head is
    applied to every atom. The stress head emits six Voigt components
    (xx, yy, zz, yz, xz, xy) expanded into a symmetric matrix.
    """

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__(engine)
        d = config.d_model
        self.energy_head = self.add_child("energy_head", MLP(engine, d, d, 1, rng))
        self.force_head = self.add_child("force_head", MLP(engine, d, d, 3, rng))
        self.stress_head = self.add_child("stress_head", MLP(engine, d, d, 6, rng))

    def __call__(self, latent: Tensor, mask: np.ndarray) -> EFSBatch:
        return heads_forward(self, latent, mask)


def heads_forward(heads: EFSHeads, latent: Tensor, mask: np.ndarray | None = None) -> EFSBatch:
    """Apply the three heads to ``(B, N, d)`` latents.

    Args:
        heads: Head parameters.
        latent: Encoder output.
        mask: ``(B, N)`` 1/0 mask of real atoms; all atoms are real when omitted.

    Returns:
        Batched energy ``(B,)``, forces ``(B, N, 3)`` (zero on padding) and
        symmetric stress ``(B, 3, 3)``.
    """
    batch, atoms, _ = latent.shape
    mask = np.ones((batch, atoms)) if mask is None else np.asarray(mask, dtype=np.float64)
    pooled = masked_mean(latent, mask)

    energy = heads.energy_head(pooled).reshape(batch)
    forces = heads.force_head(latent) * mask[..., None]
    voigt = heads.stress_head(pooled)
    stress = take(voigt, VOIGT_TO_MATRIX_INDEX, axis=1)
    return EFSBatch(energy=energy, forces=forces, stress=stress)
