"""Synthetic materials labelled by a truncated Lennard-Jones pair potential.

Every structure is a small cluster of atoms in a cubic periodic cell whose side
is at least twice the interaction cutoff, so the minimum-image convention sees
each pair exactly once and the labels are smooth in the positions.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from matscale.data.geometry import cell_volume, minimum_image_shifts
from matscale.data.records import MaterialRecord
from matscale.exceptions import ContractError

logger = logging.getLogger(__name__)

HARD_CORE_FRACTION = 0.1
MAX_RESAMPLES = 100
_NEIGHBOUR_OFFSETS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.int64
)


class LJParams(BaseModel):
    """Lennard-Jones parameters.

    Attributes:
        epsilon: Well depth in eV.
        sigma: Zero-crossing distance in Angstrom.
        cutoff: Interaction cutoff in Angstrom; defaults to 2.5 sigma. The
            potential is truncated, not shifted.
    """

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=0.25, gt=0.0)
    sigma: float = Field(default=2.0, gt=0.0)
    cutoff: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _default_cutoff(self) -> LJParams:
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", 2.5 * self.sigma)
        return self

    @property
    def r_cut(self) -> float:
        return float(self.cutoff if self.cutoff is not None else 2.5 * self.sigma)

    @property
    def r_min(self) -> float:
        """Distance of the potential minimum, 2^(1/6) sigma."""
        return 2.0 ** (1.0 / 6.0) * self.sigma


def lj_energy_forces_stress(
    cart: np.ndarray,
    cell: np.ndarray,
    params: LJParams,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Energy, forces and virial stress of a periodic Lennard-Jones system.

    Uses the minimum-image convention, so ``params.r_cut`` should not exceed
    half the shortest cell height.

    Returns:
        ``(energy, forces, stress)`` with ``forces = -dE/dx`` and
        ``stress = W / V`` where ``W = sum_{i<j} d_ij (x) F_j`` and
        ``d_ij = x_j - x_i``. Repulsive configurations have positive trace.
    """
    cart = np.asarray(cart, dtype=np.float64)
    cell = np.asarray(cell, dtype=np.float64)
    n_atoms = cart.shape[0]
    forces = np.zeros((n_atoms, 3))
    if n_atoms < 2:
        return 0.0, forces, np.zeros((3, 3))

    i, j = np.triu_indices(n_atoms, k=1)
    shifts = minimum_image_shifts(cart, cell)[i, j]
    d = cart[j] - cart[i] - shifts @ cell
    r = np.linalg.norm(d, axis=1)
    inside = r < params.r_cut
    i, j, d, r = i[inside], j[inside], d[inside], r[inside]

    sr6 = (params.sigma / r) ** 6
    energy = float(np.sum(4.0 * params.epsilon * (sr6 * sr6 - sr6)))
    # -dE/dr divided by r, so f_j = coeff * d
    coeff = 24.0 * params.epsilon * (2.0 * sr6 * sr6 - sr6) / (r * r)
    f_j = coeff[:, None] * d
    np.add.at(forces, j, f_j)
    np.add.at(forces, i, -f_j)

    virial = np.einsum("pa,pb->ab", d, f_j)
    stress = virial / cell_volume(cell)
    return energy, forces, 0.5 * (stress + stress.T)


def _grow_cluster(n_atoms: int, grid: int, rng: np.random.Generator) -> np.ndarray:
    """Occupy ``n_atoms`` sites of a periodic cubic grid by random face-adjacent growth."""
    start = rng.integers(0, grid, size=3)
    occupied = [tuple(int(v) for v in start)]
    taken = set(occupied)
    while len(occupied) < n_atoms:
        candidates = sorted(
            {
                tuple(int(v) for v in np.mod(np.array(site) + offset, grid))
                for site in occupied
                for offset in _NEIGHBOUR_OFFSETS
            }
            - taken
        )
        choice = candidates[int(rng.integers(0, len(candidates)))]
        occupied.append(choice)
        taken.add(choice)
    return np.array(occupied, dtype=np.float64)


def _min_pair_distance(cart: np.ndarray, cell: np.ndarray) -> float:
    if cart.shape[0] < 2:
        return math.inf
    i, j = np.triu_indices(cart.shape[0], k=1)
    d = cart[j] - cart[i] - minimum_image_shifts(cart, cell)[i, j] @ cell
    return float(np.min(np.linalg.norm(d, axis=1)))


def _wrap(frac: np.ndarray) -> np.ndarray:
    wrapped = np.mod(frac, 1.0)
    wrapped[wrapped >= 1.0] = 0.0
    return wrapped


def generate_synthetic(
    n_materials: int,
    atoms_range: tuple[int, int] = (2, 8),
    seed: int = 0,
    potential_params: LJParams | None = None,
    rattle: float = 0.05,
    strain: float = 0.05,
    species: tuple[int, ...] = (18,),
    min_cell_length: float = 12.0,
) -> list[MaterialRecord]:
    """Generate Lennard-Jones labelled materials.

    Each material places ``n`` atoms (``n`` uniform in ``atoms_range``,
    inclusive) on a simple cubic lattice at the pair-potential minimum
    spacing, grown as a connected cluster, isotropically strains the cell by
    up to ``strain`` and rattles positions with Gaussian noise of standard
    deviation ``rattle * sigma``. Rattles that bring two atoms closer than
    0.1 sigma are resampled.

    Args:
        n_materials: Number of records, at least 1.
        atoms_range: Inclusive (min, max) atom count.
        seed: Seed of the generator; equal seeds give identical datasets.
        potential_params: Lennard-Jones parameters (defaults to ``LJParams()``).
        rattle: Rattle amplitude in units of sigma.
        strain: Maximum isotropic strain of the cell, in [0, 1).
        species: Atomic numbers drawn uniformly for each atom.
        min_cell_length: Lower bound on the cell side in Angstrom.

    Returns:
        List of validated records with frac coordinates wrapped into [0, 1).

    Raises:
        ContractError: If any argument is out of range or a cluster does not
            fit in the cell.

    Examples:
        >>> records = generate_synthetic(4, atoms_range=(2, 3), seed=1)
        >>> len(records)
        4
    """
    params = potential_params or LJParams()
    lo, hi = atoms_range
    if n_materials < 1:
        raise ContractError(f"n_materials must be >= 1, got {n_materials}")
    if not 1 <= lo <= hi:
        raise ContractError(f"atoms_range must satisfy 1 <= min <= max, got {atoms_range}")
    if not 0.0 <= strain < 1.0:
        raise ContractError(f"strain must lie in [0, 1), got {strain}")
    if not species:
        raise ContractError("species must name at least one atomic number")

    spacing = params.r_min
    target = max(2.0 * params.r_cut, min_cell_length)
    grid = math.ceil(target / (spacing * (1.0 - strain)))
    if hi > grid**3:
        raise ContractError(f"{hi} atoms do not fit on a {grid}^3 site grid")

    rng = np.random.default_rng(seed)
    species_arr = np.asarray(species, dtype=np.int64)
    records: list[MaterialRecord] = []
    for _ in range(n_materials):
        n_atoms = int(rng.integers(lo, hi + 1))
        scale = 1.0 + float(rng.uniform(-strain, strain))
        side = grid * spacing * scale
        cell = np.eye(3) * side
        sites = _grow_cluster(n_atoms, grid, rng) * spacing * scale
        numbers = rng.choice(species_arr, size=n_atoms)

        for _attempt in range(MAX_RESAMPLES):
            cart = sites + rng.normal(0.0, rattle * params.sigma, size=sites.shape)
            frac = _wrap(cart / side)
            cart = frac @ cell
            if _min_pair_distance(cart, cell) >= HARD_CORE_FRACTION * params.sigma:
                break
            logger.debug("Rattle violated the hard-core guard; resampling")
        else:
            raise ContractError(f"Could not place {n_atoms} atoms after {MAX_RESAMPLES} attempts")

        energy, forces, stress = lj_energy_forces_stress(cart, cell, params)
        records.append(
            MaterialRecord(
                atomic_numbers=numbers,
                cell=cell,
                cart_positions=cart,
                frac_positions=frac,
                energy=energy,
                forces=forces,
                stress=stress,
            )
        )

    logger.info(f"Generated {n_materials} synthetic materials (seed={seed}, atoms={atoms_range})")
    return records
