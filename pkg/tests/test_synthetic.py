"""Tests for the Lennard-Jones labelled synthetic dataset."""

from __future__ import annotations

import numpy as np
import pytest

from matscale.data.geometry import cell_volume
from matscale.data.synthetic import LJParams, generate_synthetic, lj_energy_forces_stress
from matscale.exceptions import ContractError

CELL = np.eye(3) * 12.0
CART = np.array([[0.0, 0.0, 0.0], [2.3, 0.0, 0.0], [0.0, 2.4, 0.3]])


def _energy(cart: np.ndarray, cell: np.ndarray) -> float:
    return lj_energy_forces_stress(cart, cell, LJParams())[0]


class TestPotential:
    """Energy, forces and stress of the pair potential."""

    def test_pair_at_minimum(self) -> None:
        params = LJParams()
        cart = np.array([[1.0, 1.0, 1.0], [1.0 + params.r_min, 1.0, 1.0]])
        energy, forces, _ = lj_energy_forces_stress(cart, CELL, params)
        assert energy == pytest.approx(-params.epsilon, rel=1e-12)
        np.testing.assert_allclose(forces, 0.0, atol=1e-12)

    def test_default_cutoff(self) -> None:
        assert LJParams().r_cut == pytest.approx(5.0)
        assert LJParams(sigma=1.0, cutoff=4.0).r_cut == 4.0

    def test_pairs_beyond_cutoff_do_not_interact(self) -> None:
        cart = np.array([[0.0, 0.0, 0.0], [5.5, 0.0, 0.0]])
        energy, forces, stress = lj_energy_forces_stress(cart, CELL, LJParams())
        assert energy == 0.0
        assert not forces.any()
        assert not stress.any()

    def test_forces_sum_to_zero(self) -> None:
        _, forces, _ = lj_energy_forces_stress(CART, CELL, LJParams())
        np.testing.assert_allclose(forces.sum(axis=0), 0.0, atol=1e-12)

    def test_forces_are_negative_gradient(self) -> None:
        _, forces, _ = lj_energy_forces_stress(CART, CELL, LJParams())
        h = 1e-6
        numeric = np.zeros_like(CART)
        for index in np.ndindex(CART.shape):
            plus, minus = CART.copy(), CART.copy()
            plus[index] += h
            minus[index] -= h
            numeric[index] = -(_energy(plus, CELL) - _energy(minus, CELL)) / (2 * h)
        np.testing.assert_allclose(forces, numeric, rtol=1e-6, atol=1e-8)

    def test_stress_is_strain_derivative(self) -> None:
        """stress = -(1/V) dE/d(strain) under a homogeneous deformation."""
        _, _, stress = lj_energy_forces_stress(CART, CELL, LJParams())
        h = 1e-6
        numeric = np.zeros((3, 3))
        for a in range(3):
            for b in range(3):
                eps = np.zeros((3, 3))
                eps[a, b] += h / 2
                eps[b, a] += h / 2
                plus, minus = np.eye(3) + eps, np.eye(3) - eps
                d_energy = _energy(CART @ plus, CELL @ plus) - _energy(CART @ minus, CELL @ minus)
                numeric[a, b] = -d_energy / (2 * h) / cell_volume(CELL)
        np.testing.assert_allclose(stress, numeric, rtol=1e-5, atol=1e-10)

    def test_compressed_pair_has_positive_trace(self) -> None:
        cart = np.array([[0.0, 0.0, 0.0], [1.8, 0.0, 0.0]])
        _, _, stress = lj_energy_forces_stress(cart, CELL, LJParams())
        assert np.trace(stress) > 0
        np.testing.assert_array_equal(stress, stress.T)


class TestGenerateSynthetic:
    """Dataset generation."""

    def test_same_seed_same_dataset(self) -> None:
        assert generate_synthetic(5, seed=3) == generate_synthetic(5, seed=3)

    def test_different_seeds_differ(self) -> None:
        assert generate_synthetic(5, seed=3) != generate_synthetic(5, seed=4)

    def test_atom_counts_within_range(self) -> None:
        records = generate_synthetic(30, atoms_range=(3, 5), seed=1)
        counts = {r.n_atoms for r in records}
        assert counts <= {3, 4, 5}
        assert len(counts) > 1

    def test_structures_are_well_formed(self, synthetic_records) -> None:
        params = LJParams()
        for record in synthetic_records:
            side = record.cell[0, 0]
            assert side >= 12.0 - 1e-9
            np.testing.assert_array_equal(record.cell, np.eye(3) * side)
            assert np.all(record.frac_positions >= 0.0)
            assert np.all(record.frac_positions < 1.0)
            assert set(record.atomic_numbers.tolist()) == {18}
            np.testing.assert_allclose(record.forces.sum(axis=0), 0.0, atol=1e-10)
            energy, forces, stress = lj_energy_forces_stress(record.cart_positions, record.cell, params)
            assert record.energy == energy
            np.testing.assert_array_equal(record.forces, forces)
            np.testing.assert_array_equal(record.stress, stress)

    def test_clusters_interact(self, synthetic_records) -> None:
        assert any(r.energy < 0 for r in synthetic_records)

    def test_species_are_drawn_from_the_given_set(self) -> None:
        records = generate_synthetic(10, atoms_range=(4, 4), seed=2, species=(10, 18))
        numbers = np.concatenate([r.atomic_numbers for r in records])
        assert set(numbers.tolist()) <= {10, 18}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_materials": 0},
            {"n_materials": 2, "atoms_range": (0, 3)},
            {"n_materials": 2, "atoms_range": (4, 3)},
            {"n_materials": 2, "strain": 1.0},
            {"n_materials": 2, "species": ()},
            {"n_materials": 2, "atoms_range": (2, 10_000)},
        ],
    )
    def test_bad_arguments(self, kwargs) -> None:
        with pytest.raises(ContractError):
            generate_synthetic(**kwargs)
