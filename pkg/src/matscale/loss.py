"""Combined energy/force/stress loss and per-channel error metrics.

Every channel uses the mean absolute error:

- energy: ``|dE|`` per structure (divided by the atom count in per-atom mode)
- force: mean of ``|dF|`` over atoms and Cartesian components
- isotropic stress: ``|d iso|`` with ``iso = trace(S) / 3``
- anisotropic stress: mean of ``|d aniso|`` over the nine components, with
  ``aniso = S - iso * I``

The total is the weighted sum of the four terms. A batch loss is the mean of
the per-structure values.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from matscale.data.batching import Batch, collate
from matscale.data.records import MaterialRecord
from matscale.exceptions import ContractError
from matscale.models.prediction import EFSBatch, EFSPrediction
from matscale.tensor import Engine, Tensor

TERMS = ("energy", "force", "iso", "aniso")
SYMMETRY_TOL = 1e-8


class LossWeights(BaseModel):
    """Non-negative channel weights; at least one must be positive."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w_energy: float = Field(default=1.0, ge=0.0)
    w_force: float = Field(default=1.0, ge=0.0)
    w_iso_stress: float = Field(default=1.0, ge=0.0)
    w_aniso_stress: float = Field(default=1.0, ge=0.0)
    per_atom_energy: bool = False

    @model_validator(mode="after")
    def _check_positive(self) -> LossWeights:
        if max(self.w_energy, self.w_force, self.w_iso_stress, self.w_aniso_stress) <= 0.0:
            raise ValueError("at least one loss weight must be positive")
        return self

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_energy, self.w_force, self.w_iso_stress, self.w_aniso_stress)


class LossBreakdown(BaseModel):
    """Total loss L and its four unweighted terms."""

    model_config = ConfigDict(frozen=True)

    total: float
    energy_term: float
    force_term: float
    iso_term: float
    aniso_term: float

    def weighted_sum(self, weights: LossWeights) -> float:
        w = weights.as_tuple()
        return w[0] * self.energy_term + w[1] * self.force_term + w[2] * self.iso_term + w[3] * self.aniso_term


def decompose_stress(stress: np.ndarray) -> tuple[float, np.ndarray]:
    """Split a symmetric stress into isotropic and anisotropic parts.

    Returns:
        ``(iso, aniso)`` with ``iso = trace(S) / 3`` and ``aniso = S - iso * I``.

    Raises:
        ContractError: If ``stress`` is not 3 x 3 or not symmetric within 1e-8.

    Examples:
        >>> iso, aniso = decompose_stress(np.diag([1.0, 2.0, 3.0]))
        >>> iso, np.diag(aniso).tolist()
        (2.0, [-1.0, 0.0, 1.0])
    """
    matrix = np.asarray(stress, dtype=np.float64)
    if matrix.shape != (3, 3):
        raise ContractError(f"stress must be 3 x 3, got shape {matrix.shape}")
    asymmetry = float(np.max(np.abs(matrix - matrix.T)))
    if asymmetry > SYMMETRY_TOL:
        raise ContractError(f"stress is not symmetric (max |S - S^T| = {asymmetry:.3e})")
    iso = float(np.trace(matrix)) / 3.0
    return iso, matrix - iso * np.eye(3)


def structure_loss_terms(pred: EFSBatch, target: Batch, weights: LossWeights) -> dict[str, Tensor]:
    """Per-structure loss terms ``(B,)`` as differentiable tensors.

    Keys are ``energy``, ``force``, ``iso``, ``aniso`` and ``total``.

    Raises:
        ContractError: If prediction and target shapes disagree.
    """
    expected = {
        "energy": (target.size,),
        "forces": target.forces.shape,
        "stress": (target.size, 3, 3),
    }
    for name, tensor in (("energy", pred.energy), ("forces", pred.forces), ("stress", pred.stress)):
        if tensor.shape != expected[name]:
            raise ContractError(
                f"Prediction {name} has shape {tensor.shape}, target expects {expected[name]}",
                {"field": name},
            )

    n_atoms = target.n_atoms
    energy = (pred.energy - target.energy).abs()
    if weights.per_atom_energy:
        energy = energy * (1.0 / n_atoms)
    force = ((pred.forces - target.forces).abs() * target.mask[..., None]).sum(axis=(1, 2)) * (
        1.0 / (3.0 * n_atoms)
    )

    eye = np.eye(3)
    delta = pred.stress - target.stress
    delta_iso = (delta * eye).sum(axis=(1, 2)) * (1.0 / 3.0)
    delta_aniso = delta - delta_iso.reshape(target.size, 1, 1) * eye
    iso = delta_iso.abs()
    aniso = delta_aniso.abs().sum(axis=(1, 2)) * (1.0 / 9.0)

    w = weights.as_tuple()
    total = energy * w[0] + force * w[1] + iso * w[2] + aniso * w[3]
    return {"energy": energy, "force": force, "iso": iso, "aniso": aniso, "total": total}


def batch_loss(pred: EFSBatch, target: Batch, weights: LossWeights) -> tuple[Tensor, dict[str, Tensor]]:
    """Mean-over-structures loss for training.

    Returns:
        ``(total, terms)``: the scalar total to back-propagate and the scalar
        mean of each term.
    """
    terms = structure_loss_terms(pred, target, weights)
    means = {name: value.mean() for name, value in terms.items()}
    return means["total"], means


def breakdown_from_terms(terms: dict[str, Tensor]) -> LossBreakdown:
    return LossBreakdown(
        total=terms["total"].item(),
        energy_term=terms["energy"].item(),
        force_term=terms["force"].item(),
        iso_term=terms["iso"].item(),
        aniso_term=terms["aniso"].item(),
    )


def _as_batch(pred: EFSPrediction, engine: Engine) -> EFSBatch:
    return EFSBatch(
        energy=engine.constant(np.array([pred.energy])),
        forces=engine.constant(pred.forces[None]),
        stress=engine.constant(pred.stress[None]),
    )


def combined_loss(
    pred: EFSPrediction,
    target: MaterialRecord,
    weights: LossWeights | None = None,
) -> LossBreakdown:
    """Weighted L1 loss of one prediction against its labelled material.

    Raises:
        ContractError: If the atom counts differ.

    Examples:
        >>> combined_loss(prediction_equal_to(record), record).total
        0.0
    """
    weights = weights or LossWeights()
    if pred.n_atoms != target.n_atoms:
        raise ContractError(
            f"Prediction has {pred.n_atoms} atoms, target has {target.n_atoms}",
            {"field": "forces"},
        )
    engine = Engine()
    terms = structure_loss_terms(_as_batch(pred, engine), collate([target]), weights)
    return breakdown_from_terms({name: value.sum() for name, value in terms.items()})


def _record_errors(pred: EFSPrediction, target: MaterialRecord) -> dict[str, float]:
    if pred.forces.shape != target.forces.shape:
        raise ContractError(
            f"Prediction forces {pred.forces.shape} do not match target {target.forces.shape}",
            {"field": "forces"},
        )
    return {
        "energy": abs(pred.energy - target.energy),
        "force": float(np.mean(np.abs(pred.forces - target.forces))),
        "stress": float(np.mean(np.abs(pred.stress - target.stress))),
    }


def error_metrics(
    pred: EFSPrediction | Sequence[EFSPrediction],
    target: MaterialRecord | Sequence[MaterialRecord],
) -> dict[str, float]:
    """Mean absolute error per channel.

    For sequences, energy and stress errors are averaged over materials and
    the force error over every atom component, so the batch value equals the
    mean of per-material values when all materials have the same size.

    Raises:
        ContractError: If the inputs do not pair up or shapes disagree.
    """
    if isinstance(pred, EFSPrediction) and isinstance(target, MaterialRecord):
        return _record_errors(pred, target)
    preds = [pred] if isinstance(pred, EFSPrediction) else list(pred)
    targets = [target] if isinstance(target, MaterialRecord) else list(target)
    if len(preds) != len(targets) or not preds:
        raise ContractError(f"Got {len(preds)} predictions for {len(targets)} targets")
    per_record = [_record_errors(p, t) for p, t in zip(preds, targets, strict=True)]
    force_abs = np.concatenate([np.abs(p.forces - t.forces).reshape(-1) for p, t in zip(preds, targets, strict=True)])
    return {
        "energy": float(np.mean([m["energy"] for m in per_record])),
        "force": float(np.mean(force_abs)),
        "stress": float(np.mean([m["stress"] for m in per_record])),
    }
