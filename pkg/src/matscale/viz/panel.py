"""Side-by-side SVG of a material's labelled and predicted properties.

The left panel shows the labels, the right panel the prediction. Atoms are
drawn at their Cartesian x-y position (z is dropped) with the circle radius
growing with z. Red arrows show the x-y projection of each force; one scale
is shared by both panels so that the longest arrow spans 15% of a panel's
width. The stress (Voigt order xx yy zz yz xz xy) is printed at the bottom
left of each panel and the energy at the bottom right.

Every drawn element carries an SVG id: ``atom-<panel>-<i>``,
``force-arrow-<panel>-<i>``, ``stress-<panel>`` and ``energy-<panel>``.
"""

from __future__ import annotations

import numpy as np
from matplotlib.axes import Axes
from matplotlib.figure import Figure
from matplotlib.patches import Circle

from matscale.data.records import MaterialRecord, matrix_to_voigt
from matscale.exceptions import ContractError
from matscale.models.prediction import EFSPrediction
from matscale.viz.style import ATOM_COLOR, FORCE_COLOR, render_svg

FIGURE_SIZE = (9.0, 5.0)
ARROW_FRACTION = 0.15
MIN_RADIUS_FRACTION = 0.03
MAX_RADIUS_FRACTION = 0.06
MIN_SPAN = 1.0
_ZERO_FORCE = 1e-12


class PanelFrame:
    """Square x-y window in Angstrom shared by both panels."""

    def __init__(self, positions: np.ndarray) -> None:
        xy = positions[:, :2]
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        self.center = (lo + hi) / 2
        self.width = 1.6 * max(float(np.max(hi - lo)), MIN_SPAN)

        z = positions[:, 2]
        z_span = z.max() - z.min()
        depth = (z - z.min()) / z_span if z_span > 0 else np.full(len(z), 0.5)
        self.radii = self.width * (MIN_RADIUS_FRACTION + (MAX_RADIUS_FRACTION - MIN_RADIUS_FRACTION) * depth)

    def apply(self, ax: Axes) -> None:
        half = self.width / 2
        ax.set_xlim(self.center[0] - half, self.center[0] + half)
        ax.set_ylim(self.center[1] - half, self.center[1] + half)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])


def force_scale(actual: np.ndarray, predicted: np.ndarray, panel_width: float) -> float | None:
    """Arrow length per eV/Angstrom making the longest projected force 15% of a panel.

    Returns ``None`` when every force is zero.
    """
    longest = max(
        float(np.max(np.linalg.norm(actual[:, :2], axis=1), initial=0.0)),
        float(np.max(np.linalg.norm(predicted[:, :2], axis=1), initial=0.0)),
    )
    if longest <= _ZERO_FORCE:
        return None
    return ARROW_FRACTION * panel_width / longest


def _draw_panel(
    ax: Axes,
    name: str,
    frame: PanelFrame,
    positions: np.ndarray,
    numbers: np.ndarray,
    forces: np.ndarray,
    stress: np.ndarray,
    energy: float,
    scale: float | None,
) -> None:
    frame.apply(ax)
    ax.set_title(name.capitalize())
    for i, ((x, y), r, z) in enumerate(zip(positions[:, :2], frame.radii, numbers, strict=True)):
        ax.add_patch(Circle((x, y), r, facecolor=ATOM_COLOR, edgecolor="#222222", gid=f"atom-{name}-{i}"))
        ax.text(x, y, str(int(z)), ha="center", va="center", fontsize=7)

    if scale is not None:
        for i, ((x, y), f) in enumerate(zip(positions[:, :2], forces, strict=True)):
            if np.hypot(f[0], f[1]) <= _ZERO_FORCE:
                continue
            ax.arrow(
                x,
                y,
                f[0] * scale,
                f[1] * scale,
                width=0.006 * frame.width,
                head_width=0.03 * frame.width,
                length_includes_head=True,
                color=FORCE_COLOR,
                gid=f"force-arrow-{name}-{i}",
            )

    voigt = matrix_to_voigt(stress)
    stress_text = "\n".join(
        [
            "stress (eV/A^3)",
            " ".join(f"{v:.4f}" for v in voigt[:3]),
            " ".join(f"{v:.4f}" for v in voigt[3:]),
        ]
    )
    ax.text(0.0, -0.04, stress_text, transform=ax.transAxes, ha="left", va="top", fontsize=9, gid=f"stress-{name}")
    label = "force scale: n/a" if scale is None else f"force scale: {scale:.3g} A per eV/A"
    ax.text(1.0, -0.04, label, transform=ax.transAxes, ha="right", va="top", fontsize=8)
    ax.text(
        1.0, -0.16, f"E = {energy:.4f} eV", transform=ax.transAxes, ha="right", va="top", gid=f"energy-{name}"
    )


def render_material_panel(actual: MaterialRecord, predicted: EFSPrediction) -> str:
    """SVG document comparing a material's labels with a prediction.

    Output is fully determined by the inputs.

    Raises:
        ContractError: If the atom counts differ.

    Examples:
        >>> svg = render_material_panel(record, model.predict(record))
        >>> svg.count('id="atom-')  # 3-atom record
        6
    """
    if actual.n_atoms != predicted.n_atoms:
        raise ContractError(
            f"Material has {actual.n_atoms} atoms but the prediction has {predicted.n_atoms}"
        )
    frame = PanelFrame(actual.cart_positions)
    scale = force_scale(actual.forces, predicted.forces, frame.width)

    def draw(fig: Figure) -> None:
        left, right = fig.subplots(1, 2)
        fig.subplots_adjust(left=0.03, right=0.97, top=0.92, bottom=0.24, wspace=0.1)
        positions, numbers = actual.cart_positions, actual.atomic_numbers
        _draw_panel(left, "actual", frame, positions, numbers, actual.forces, actual.stress, actual.energy, scale)
        _draw_panel(
            right,
            "predicted",
            frame,
            positions,
            numbers,
            predicted.forces,
            predicted.stress,
            predicted.energy,
            scale,
        )

    return render_svg(draw, FIGURE_SIZE)
