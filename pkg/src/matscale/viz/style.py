"""Shared matplotlib settings and SVG rendering.

Figures are built on :class:`matplotlib.figure.Figure` without pyplot, so
rendering works from worker threads and never opens a window. A fixed
``svg.hashsalt`` and a dropped date stamp make equal figures serialize to
equal bytes.
"""

from __future__ import annotations

import io
import threading
from collections.abc import Callable

import matplotlib
from matplotlib.figure import Figure

STYLE = {
    "svg.hashsalt": "matscale",
    "svg.fonttype": "none",
    "font.family": "sans-serif",
    "font.size": 10,
    "axes.titlesize": 12,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.facecolor": "white",
    "savefig.facecolor": "white",
    "path.simplify": False,
}

FORCE_COLOR = "#d62728"
ATOM_COLOR = "#9ecae1"
FIT_COLOR = "#d62728"

# rc_context mutates process-wide rcParams
_RENDER_LOCK = threading.Lock()


def render_svg(draw: Callable[[Figure], None], size: tuple[float, float]) -> str:
    """Build a figure of ``size`` inches with ``draw`` and return it as SVG text.

    Args:
        draw: Populates the empty figure.
        size: Width and height in inches.

    Returns:
        A standalone SVG document; identical drawings give identical text.
    """
    with _RENDER_LOCK, matplotlib.rc_context(STYLE):
        fig = Figure(figsize=size)
        draw(fig)
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()
