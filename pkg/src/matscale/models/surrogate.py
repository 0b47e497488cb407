"""Rotation- and translation-invariant message-passing surrogate.

A physically constrained contrast model: the energy is built only from
interatomic distances, and forces and stress are obtained by differentiating
that energy. Forces are therefore conservative and co-rotate with the input.

Displacements are formed under a homogeneous strain ``e`` applied to both
positions and cell, ``x' = x (I + e)``, so that

    forces = -dE/dx,    stress = -(1/V) dE/de  at e = 0,

which matches the virial convention of the training labels.
"""

from __future__ import annotations

import numpy as np

from matscale.data.batching import Batch
from matscale.models.config import ModelConfig
from matscale.models.embedding import check_atomic_numbers
from matscale.models.layers import MLP, Linear
from matscale.models.module import Model, uniform_init
from matscale.models.prediction import EFSBatch
from matscale.tensor import Engine, Tensor, matmul
from matscale.tensor.ops import take

# Added to r^2 of self and padded pairs so that sqrt stays differentiable
_INACTIVE_PAIR_OFFSET = 1.0


class InvariantSurrogate(Model):
    """Continuous-filter message passing on a radial basis of pair distances.

    Layout: element embedding, ``n_interactions`` rounds of
    ``h_i += update(sum_j filter(rbf(r_ij)) * fc(r_ij) * proj(h_j))``, a
    per-atom energy network, and a sum over atoms.
    """

    uses_gradient_forces = True

    def __init__(self, engine: Engine, config: ModelConfig, rng: np.random.Generator | None = None) -> None:
        super().__init__(engine, config)
        rng = rng if rng is not None else np.random.default_rng(config.init_seed)
        rows, d = config.max_num_elements, config.d_model
        self.table = self.add_param("element_table", uniform_init(rng, (rows, d), rows), embedding=True)
        self.filters = [
            self.add_child(f"filter{t}", MLP(engine, config.n_rbf, d, d, rng))
            for t in range(config.n_interactions)
        ]
        self.projections = [
            self.add_child(f"project{t}", Linear(engine, d, d, rng)) for t in range(config.n_interactions)
        ]
        self.updates = [
            self.add_child(f"update{t}", MLP(engine, d, d, d, rng)) for t in range(config.n_interactions)
        ]
        self.energy_net = self.add_child("energy_net", MLP(engine, d, d, 1, rng))
        self.centers = np.linspace(0.0, config.cutoff, config.n_rbf)
        spacing = self.centers[1] - self.centers[0]
        self.gamma = 0.5 / spacing**2

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def _pair_distances(self, positions: Tensor, strain: Tensor, batch: Batch) -> tuple[Tensor, np.ndarray]:
        """Strained minimum-image distances ``(B, N, N)`` and the active-pair mask."""
        size, atoms = batch.size, batch.max_atoms
        deform = strain + np.eye(3)
        x = matmul(positions, deform)
        cell = matmul(self.engine.constant(batch.cell), deform)
        image = matmul(self.engine.constant(batch.shifts.reshape(size, atoms * atoms, 3)), cell)
        image = image.reshape(size, atoms, atoms, 3)

        d = x.reshape(size, 1, atoms, 3) - x.reshape(size, atoms, 1, 3) - image
        pair_mask = batch.mask[:, :, None] * batch.mask[:, None, :] * (1.0 - np.eye(atoms))[None]
        r2 = (d * d).sum(axis=-1) + (1.0 - pair_mask) * _INACTIVE_PAIR_OFFSET
        return r2.sqrt(), pair_mask

    def _edge_weights(self, r: Tensor, pair_mask: np.ndarray) -> tuple[Tensor, Tensor]:
        """Gaussian basis ``(B, N, N, K)`` and smooth cosine cutoff ``(B, N, N)``."""
        cutoff = self.config.cutoff
        inside = pair_mask * (r.data < cutoff)
        rbf = ((r.reshape(*r.shape, 1) - self.centers).square() * -self.gamma).exp()
        envelope = ((r * (np.pi / cutoff)).cos() + 1.0) * (0.5 * inside)
        return rbf, envelope

    # ------------------------------------------------------------------
    # Energy and its derivatives
    # ------------------------------------------------------------------

    def energy(self, positions: Tensor, strain: Tensor, batch: Batch) -> Tensor:
        """Predicted energies ``(B,)`` as a differentiable function of the inputs."""
        check_atomic_numbers(batch.numbers, self.config.max_num_elements, batch.mask)
        r, pair_mask = self._pair_distances(positions, strain, batch)
        rbf, envelope = self._edge_weights(r, pair_mask)
        weight = envelope.reshape(*envelope.shape, 1)

        h = take(self.table, batch.numbers, axis=0)
        size, atoms, width = h.shape
        for filt, project, update in zip(self.filters, self.projections, self.updates, strict=True):
            neighbours = project(h).reshape(size, 1, atoms, width)
            messages = (filt(rbf) * weight * neighbours).sum(axis=2)
            h = h + update(messages)

        per_atom = self.energy_net(h).reshape(size, atoms) * batch.mask
        return per_atom.sum(axis=1)

    def forward(self, batch: Batch, training: bool = False) -> EFSBatch:
        engine = self.engine
        volume = np.abs(np.linalg.det(batch.cell))
        with engine.enable_grad():
            positions = engine.tensor(batch.cart, requires_grad=True)
            strain = engine.tensor(np.zeros((batch.size, 3, 3)), requires_grad=True)
            energy = self.energy(positions, strain, batch)
            grad_pos, grad_strain = engine.grad(energy.sum(), [positions, strain], create_graph=training)

        forces = -grad_pos * batch.mask[..., None]
        stress = (grad_strain + grad_strain.swap_last()) * (-0.5 / volume)[:, None, None]
        if not training:
            return EFSBatch(energy=energy.detach(), forces=forces.detach(), stress=stress.detach())
        return EFSBatch(energy=energy, forces=forces, stress=stress)
