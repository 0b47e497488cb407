"""Material record model: one structure with its energy, forces and stress labels."""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from matscale.data.geometry import SINGULAR_DET, to_cartesian, to_fractional

MAX_ATOMIC_NUMBER = 118
VOIGT_ORDER: tuple[tuple[int, int], ...] = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
STRESS_SYMMETRY_TOL = 1e-10
FRAC_CONSISTENCY_TOL = 1e-8


def _frozen_array(value: Any, dtype: type, ndim: int, name: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=dtype)
    except (TypeError, ValueError) as err:
        raise ValueError(f"{name} must be a numeric array") from err
    if array.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if dtype is np.float64 and not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


def _atom_count(info: ValidationInfo) -> int | None:
    numbers = info.data.get("atomic_numbers")
    return None if numbers is None else len(numbers)


def voigt_to_matrix(voigt: np.ndarray) -> np.ndarray:
    """Symmetric 3 x 3 matrix from six components in (xx, yy, zz, yz, xz, xy) order."""
    matrix = np.zeros((3, 3), dtype=np.float64)
    for value, (i, j) in zip(np.asarray(voigt, dtype=np.float64), VOIGT_ORDER, strict=True):
        matrix[i, j] = matrix[j, i] = value
    return matrix


def matrix_to_voigt(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    return np.array([matrix[i, j] for i, j in VOIGT_ORDER])


class MaterialRecord(BaseModel):
    """One atomic structure with DFT-style labels.

    Field aliases follow the JSONL schema (``cart``, ``frac``); both the
    aliases and the attribute names are accepted on input.

    Attributes:
        atomic_numbers: n atomic numbers in [1, 118].
        cell: 3 x 3 cell in Angstrom; rows are lattice vectors.
        cart_positions: n x 3 Cartesian positions in Angstrom.
        frac_positions: n x 3 fractional coordinates. Computed from
            ``cart_positions`` and ``cell`` when not supplied.
        energy: Total energy in eV.
        forces: n x 3 forces in eV/Angstrom.
        stress: Symmetric 3 x 3 stress in eV/Angstrom^3, equal to
            +virial / volume (compressive trace positive).

    Examples:
        >>> record = MaterialRecord.model_validate(
        ...     {"atomic_numbers": [18], "cart": [[0, 0, 0]], "cell": np.eye(3) * 5,
        ...      "energy": 0.0, "forces": [[0, 0, 0]], "stress": np.zeros((3, 3))}
        ... )
        >>> record.n_atoms
        1
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        populate_by_name=True,
    )

    atomic_numbers: np.ndarray = Field(description="Atomic numbers, one per atom.")
    cell: np.ndarray = Field(description="3 x 3 cell, rows are lattice vectors (Angstrom).")
    cart_positions: np.ndarray = Field(alias="cart", description="Cartesian positions (Angstrom).")
    frac_positions: np.ndarray | None = Field(
        default=None,
        alias="frac",
        validate_default=True,
        description="Fractional coordinates; computed when absent.",
    )
    energy: float = Field(description="Total energy (eV).", allow_inf_nan=False)
    forces: np.ndarray = Field(description="Per-atom forces (eV/Angstrom).")
    stress: np.ndarray = Field(description="Symmetric stress tensor (eV/Angstrom^3).")

    @field_validator("atomic_numbers", mode="before")
    @classmethod
    def validate_atomic_numbers(cls, v: Any) -> np.ndarray:
        array = _frozen_array(v, np.int64, 1, "atomic_numbers")
        if array.size < 1:
            raise ValueError("a material needs at least one atom")
        if array.min() < 1 or array.max() > MAX_ATOMIC_NUMBER:
            raise ValueError(f"atomic numbers must lie in [1, {MAX_ATOMIC_NUMBER}]")
        return array

    @field_validator("cell", mode="before")
    @classmethod
    def validate_cell(cls, v: Any) -> np.ndarray:
        array = _frozen_array(v, np.float64, 2, "cell")
        if array.shape != (3, 3):
            raise ValueError(f"cell must be 3 x 3, got shape {array.shape}")
        det = float(np.linalg.det(array))
        if abs(det) <= SINGULAR_DET:
            raise ValueError(f"cell is singular (det={det:.3e})")
        return array

    @field_validator("cart_positions", "forces", mode="before")
    @classmethod
    def validate_per_atom(cls, v: Any, info: ValidationInfo) -> np.ndarray:
        name = info.field_name or "array"
        array = _frozen_array(v, np.float64, 2, name)
        n_atoms = _atom_count(info)
        if array.shape[1:] != (3,) or (n_atoms is not None and array.shape[0] != n_atoms):
            raise ValueError(f"{name} must have shape ({n_atoms}, 3), got {array.shape}")
        return array

    @field_validator("frac_positions", mode="before")
    @classmethod
    def validate_frac(cls, v: Any, info: ValidationInfo) -> np.ndarray | None:
        cart = info.data.get("cart_positions")
        cell = info.data.get("cell")
        if v is None:
            if cart is None or cell is None:
                return None
            frac = to_fractional(cart, cell)
            frac.setflags(write=False)
            return frac
        array = _frozen_array(v, np.float64, 2, "frac_positions")
        if cart is not None and array.shape != cart.shape:
            raise ValueError(f"frac_positions must have shape {cart.shape}, got {array.shape}")
        if cart is not None and cell is not None:
            deviation = np.max(np.abs(to_cartesian(array, cell) - cart), initial=0.0)
            if deviation > FRAC_CONSISTENCY_TOL:
                raise ValueError(f"frac_positions @ cell deviates from cart by {deviation:.3e}")
        return array

    @field_validator("stress", mode="before")
    @classmethod
    def validate_stress(cls, v: Any) -> np.ndarray:
        array = _frozen_array(v, np.float64, 2, "stress")
        if array.shape != (3, 3):
            raise ValueError(f"stress must be 3 x 3, got shape {array.shape}")
        asymmetry = float(np.max(np.abs(array - array.T)))
        if asymmetry > STRESS_SYMMETRY_TOL:
            raise ValueError(f"stress is not symmetric (max |S - S^T| = {asymmetry:.3e})")
        return array

    @property
    def n_atoms(self) -> int:
        return int(self.atomic_numbers.shape[0])

    @property
    def stress_voigt(self) -> np.ndarray:
        return matrix_to_voigt(self.stress)

    def to_json_dict(self) -> dict[str, Any]:
        """Plain-JSON form following the JSONL schema."""
        frac = self.frac_positions if self.frac_positions is not None else to_fractional(
            self.cart_positions, self.cell
        )
        return {
            "atomic_numbers": self.atomic_numbers.tolist(),
            "cart": self.cart_positions.tolist(),
            "frac": frac.tolist(),
            "cell": self.cell.tolist(),
            "energy": float(self.energy),
            "forces": self.forces.tolist(),
            "stress": self.stress.tolist(),
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaterialRecord):
            return NotImplemented
        return (
            self.energy == other.energy
            and np.array_equal(self.atomic_numbers, other.atomic_numbers)
            and np.array_equal(self.cell, other.cell)
            and np.array_equal(self.cart_positions, other.cart_positions)
            and np.array_equal(self.frac_positions, other.frac_positions)
            and np.array_equal(self.forces, other.forces)
            and np.array_equal(self.stress, other.stress)
        )

    __hash__ = None  # type: ignore[assignment]
