"""Energy, force and stress predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from matscale.tensor import Tensor

VOIGT_TO_MATRIX_INDEX = np.array([[0, 5, 4], [5, 1, 3], [4, 3, 2]], dtype=np.int64)


class EFSPrediction(BaseModel):
    """Prediction for a single material.

    Attributes:
        energy: Total energy in eV.
        forces: n_atoms x 3 forces in eV/Angstrom.
        stress: Symmetric 3 x 3 stress in eV/Angstrom^3.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    energy: float
    forces: np.ndarray = Field(description="Per-atom forces (eV/Angstrom).")
    stress: np.ndarray = Field(description="Symmetric stress (eV/Angstrom^3).")

    @field_validator("forces", mode="before")
    @classmethod
    def validate_forces(cls, v: Any) -> np.ndarray:
        array = np.array(v, dtype=np.float64)
        if array.ndim != 2 or array.shape[1] != 3:
            raise ValueError(f"forces must have shape (n, 3), got {array.shape}")
        array.setflags(write=False)
        return array

    @field_validator("stress", mode="before")
    @classmethod
    def validate_stress(cls, v: Any) -> np.ndarray:
        array = np.array(v, dtype=np.float64)
        if array.shape != (3, 3):
            raise ValueError(f"stress must be 3 x 3, got {array.shape}")
        if not np.array_equal(array, array.T):
            raise ValueError("stress must be symmetric")
        array.setflags(write=False)
        return array

    @property
    def n_atoms(self) -> int:
        return int(self.forces.shape[0])

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "energy": float(self.energy),
            "forces": self.forces.tolist(),
            "stress": self.stress.tolist(),
        }


@dataclass
class EFSBatch:
    """Batched predictions as engine tensors.

    Shapes are ``(B,)``, ``(B, N, 3)`` and ``(B, 3, 3)`` for a batch padded to
    ``N`` atoms; forces of padded atoms are zero.
    """

    energy: Tensor
    forces: Tensor
    stress: Tensor

    def unbatch(self, n_atoms: np.ndarray | list[int]) -> list[EFSPrediction]:
        """Split into per-material predictions, dropping padded atoms."""
        energy = np.asarray(self.energy.data, dtype=np.float64)
        forces = np.asarray(self.forces.data, dtype=np.float64)
        stress = np.asarray(self.stress.data, dtype=np.float64)
        return [
            EFSPrediction(
                energy=float(energy[b]),
                forces=forces[b, : int(n)],
                stress=stress[b],
            )
            for b, n in enumerate(n_atoms)
        ]
