"""Tests for the combined loss and error metrics."""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from matscale.data.batching import collate
from matscale.exceptions import ContractError
from matscale.loss import LossWeights, batch_loss, combined_loss, decompose_stress, error_metrics
from matscale.models.prediction import EFSBatch, EFSPrediction
from matscale.tensor import Engine


def _exact(record) -> EFSPrediction:
    return EFSPrediction(energy=record.energy, forces=record.forces, stress=record.stress)


def _offset(record, d_energy=0.0, d_force=0.0, d_stress=None) -> EFSPrediction:
    return EFSPrediction(
        energy=record.energy + d_energy,
        forces=record.forces + d_force,
        stress=record.stress + (np.zeros((3, 3)) if d_stress is None else d_stress),
    )


class TestDecomposeStress:
    """Isotropic/anisotropic split."""

    def test_reconstructs_random_matrices(self, rng: np.random.Generator) -> None:
        for _ in range(1000):
            m = rng.normal(size=(3, 3)) * 10
            stress = m + m.T
            iso, aniso = decompose_stress(stress)
            np.testing.assert_allclose(iso * np.eye(3) + aniso, stress, atol=1e-12)
            assert abs(np.trace(aniso)) <= 1e-12
            np.testing.assert_array_equal(aniso, aniso.T)

    def test_diagonal_example(self) -> None:
        iso, aniso = decompose_stress(np.diag([1.0, 2.0, 3.0]))
        assert iso == 2.0
        assert np.diag(aniso).tolist() == [-1.0, 0.0, 1.0]

    def test_asymmetric_raises(self) -> None:
        stress = np.zeros((3, 3))
        stress[0, 1] = 1e-6
        with pytest.raises(ContractError, match="symmetric"):
            decompose_stress(stress)

    def test_wrong_shape_raises(self) -> None:
        with pytest.raises(ContractError):
            decompose_stress(np.zeros((2, 2)))


class TestCombinedLoss:
    """Weighted L1 loss of one prediction."""

    def test_exact_prediction_is_zero(self, record) -> None:
        breakdown = combined_loss(_exact(record), record)
        assert breakdown.total == 0.0
        assert breakdown.force_term == 0.0

    def test_known_terms(self, record) -> None:
        pred = _offset(record, d_energy=2.0, d_force=0.5, d_stress=np.diag([3.0, 0.0, 0.0]))
        breakdown = combined_loss(pred, record)
        assert breakdown.energy_term == pytest.approx(2.0, rel=1e-12)
        assert breakdown.force_term == pytest.approx(0.5, rel=1e-12)
        assert breakdown.iso_term == pytest.approx(1.0, rel=1e-12)
        assert breakdown.aniso_term == pytest.approx(4.0 / 9.0, rel=1e-12)
        assert breakdown.total == pytest.approx(2.0 + 0.5 + 1.0 + 4.0 / 9.0, rel=1e-12)

    def test_weights_scale_terms(self, record) -> None:
        pred = _offset(record, d_energy=2.0, d_force=0.5)
        weights = LossWeights(w_energy=0.5, w_force=4.0, w_iso_stress=0.0, w_aniso_stress=0.0)
        breakdown = combined_loss(pred, record, weights)
        assert breakdown.total == pytest.approx(0.5 * 2.0 + 4.0 * 0.5, rel=1e-12)
        assert breakdown.weighted_sum(weights) == pytest.approx(breakdown.total, rel=1e-12)

    def test_per_atom_energy(self, record) -> None:
        pred = _offset(record, d_energy=3.0)
        breakdown = combined_loss(pred, record, LossWeights(per_atom_energy=True))
        assert breakdown.energy_term == pytest.approx(3.0 / record.n_atoms, rel=1e-12)

    def test_isotropic_offset_has_no_anisotropic_term(self, record) -> None:
        breakdown = combined_loss(_offset(record, d_stress=np.eye(3) * 0.3), record)
        assert breakdown.iso_term == pytest.approx(0.3, rel=1e-12)
        assert breakdown.aniso_term == pytest.approx(0.0, abs=1e-15)

    def test_atom_count_mismatch(self, record, record_factory) -> None:
        with pytest.raises(ContractError):
            combined_loss(_exact(record_factory(2, seed=1)), record)


class TestLossWeights:
    def test_defaults(self) -> None:
        assert LossWeights().as_tuple() == (1.0, 1.0, 1.0, 1.0)

    def test_negative_weight(self) -> None:
        with pytest.raises(ValidationError):
            LossWeights(w_force=-1.0)

    def test_all_zero(self) -> None:
        with pytest.raises(ValidationError, match="positive"):
            LossWeights(w_energy=0.0, w_force=0.0, w_iso_stress=0.0, w_aniso_stress=0.0)


class TestBatchLoss:
    """Batched loss tensors."""

    def test_mean_of_structure_losses(self, record_factory) -> None:
        records = [record_factory(2, seed=0), record_factory(4, seed=1)]
        preds = [_offset(r, d_energy=1.0 + i, d_force=0.1 * (i + 1)) for i, r in enumerate(records)]
        engine = Engine()
        batch = collate(records)
        width = batch.max_atoms
        forces = np.zeros((2, width, 3))
        for b, p in enumerate(preds):
            forces[b, : p.n_atoms] = p.forces
        pred = EFSBatch(
            energy=engine.constant([p.energy for p in preds]),
            forces=engine.constant(forces),
            stress=engine.constant(np.stack([p.stress for p in preds])),
        )
        total, means = batch_loss(pred, batch, LossWeights())
        expected = np.mean([combined_loss(p, r).total for p, r in zip(preds, records, strict=True)])
        assert total.item() == pytest.approx(expected, rel=1e-12)
        assert means["force"].item() == pytest.approx(0.15, rel=1e-12)

    def test_shape_mismatch(self, record) -> None:
        engine = Engine()
        pred = EFSBatch(
            energy=engine.constant([0.0, 0.0]),
            forces=engine.constant(np.zeros((2, 3, 3))),
            stress=engine.constant(np.zeros((2, 3, 3))),
        )
        with pytest.raises(ContractError):
            batch_loss(pred, collate([record]), LossWeights())


class TestErrorMetrics:
    """Per-channel mean absolute errors."""

    def test_single_record(self, record) -> None:
        metrics = error_metrics(_offset(record, d_energy=-0.5, d_force=0.25), record)
        assert metrics == pytest.approx({"energy": 0.5, "force": 0.25, "stress": 0.0})

    def test_sequence_pools_force_components(self, record_factory) -> None:
        records = [record_factory(1, seed=0), record_factory(3, seed=1)]
        preds = [_offset(records[0], d_force=1.0), _offset(records[1])]
        metrics = error_metrics(preds, records)
        assert metrics["force"] == pytest.approx(0.25, rel=1e-12)

    def test_length_mismatch(self, record) -> None:
        with pytest.raises(ContractError):
            error_metrics([_exact(record)], [record, record])
