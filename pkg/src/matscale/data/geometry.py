"""Cell geometry helpers: coordinate conversion, minimum image, rotations."""

from __future__ import annotations

import numpy as np

from matscale.exceptions import NumericError

SINGULAR_DET = 1e-12


def cell_volume(cell: np.ndarray) -> float:
    return float(abs(np.linalg.det(np.asarray(cell, dtype=np.float64))))


def to_fractional(cart: np.ndarray, cell: np.ndarray) -> np.ndarray:
    """Convert Cartesian positions to fractional coordinates.

    Lattice vectors are the rows of ``cell``, so ``cart = frac @ cell``.

    Args:
        cart: n x 3 Cartesian positions.
        cell: 3 x 3 cell matrix.

    Returns:
        n x 3 fractional coordinates ``cart @ inv(cell)``.

    Raises:
        NumericError: If ``|det(cell)| <= 1e-12``.
    """
    cell = np.asarray(cell, dtype=np.float64)
    det = float(np.linalg.det(cell))
    if abs(det) <= SINGULAR_DET:
        raise NumericError(f"Cell is singular (det={det:.3e})")
    # Solve cell^T frac^T = cart^T instead of forming the inverse
    return np.linalg.solve(cell.T, np.asarray(cart, dtype=np.float64).T).T


def to_cartesian(frac: np.ndarray, cell: np.ndarray) -> np.ndarray:
    return np.asarray(frac, dtype=np.float64) @ np.asarray(cell, dtype=np.float64)


def minimum_image_shifts(cart: np.ndarray, cell: np.ndarray) -> np.ndarray:
    """Integer lattice shifts that map every pair displacement to its nearest image.

    Returns:
        n x n x 3 array ``s`` such that ``cart[j] - cart[i] - s[i, j] @ cell``
        is the minimum-image displacement from atom i to atom j.
    """
    frac = to_fractional(cart, cell)
    delta = frac[None, :, :] - frac[:, None, :]
    return np.round(delta)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed proper rotation matrix (det = +1)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
