"""Engine-wide floating-point precision modes."""

from __future__ import annotations

from enum import Enum

import numpy as np


class PrecisionMode(str, Enum):
    """Floating-point precision shared by every tensor of one engine.

    Attributes:
        HIGH: 64-bit reference mode, used for gradient checks and determinism.
        REDUCED: 32-bit mode standing in for mixed precision. True 16-bit
            storage is not modelled.
    """

    HIGH = "high"
    REDUCED = "reduced"

    @property
    def dtype(self) -> np.dtype:
        """numpy dtype used for tensor storage in this mode."""
        return np.dtype(np.float64) if self is PrecisionMode.HIGH else np.dtype(np.float32)

    @property
    def itemsize(self) -> int:
        """Bytes per stored element."""
        return int(self.dtype.itemsize)

    @classmethod
    def from_flag(cls, mixed_precision: bool) -> PrecisionMode:
        """Map the command-line mixed-precision switch to a mode."""
        return cls.REDUCED if mixed_precision else cls.HIGH
