"""SVG visualization of predictions and scaling results."""

from matscale.viz.loglog import Curve, emit_loglog_plot, loglog_csv, write_loglog_plot
from matscale.viz.panel import force_scale, render_material_panel
from matscale.viz.style import render_svg

__all__ = [
    "Curve",
    "emit_loglog_plot",
    "force_scale",
    "loglog_csv",
    "render_material_panel",
    "render_svg",
    "write_loglog_plot",
]
