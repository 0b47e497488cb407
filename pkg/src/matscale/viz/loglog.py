"""Log-log scaling plots as standalone SVG with a CSV of the plotted points."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Sequence
from pathlib import Path
from typing import NamedTuple

from matplotlib import ticker
from matplotlib.axis import Axis
from matplotlib.figure import Figure

from matscale.exceptions import ContractError
from matscale.scaling.types import PowerLawFit
from matscale.viz.style import FIT_COLOR, render_svg

logger = logging.getLogger(__name__)

FIGURE_SIZE = (8.0, 5.0)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")


class Curve(NamedTuple):
    """A labelled series of ``(x, y)`` points."""

    label: str
    points: Sequence[tuple[float, float]]


def _check_positive(curves: Sequence[Curve]) -> None:
    for curve in curves:
        if not curve.points:
            raise ContractError(f"Curve '{curve.label}' has no points", {"curve": curve.label})
        for x, y in curve.points:
            if not (x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)):
                raise ContractError(
                    f"Curve '{curve.label}' has a non-positive value ({x}, {y}); a log scale needs positive data",
                    {"curve": curve.label},
                )


def decade_range(values: Sequence[float]) -> tuple[int, int]:
    """Smallest span of whole decades ``[lo, hi]`` covering ``values``."""
    logs = [math.log10(v) for v in values]
    lo, hi = math.floor(min(logs)), math.ceil(max(logs))
    if lo == hi:
        hi += 1
    return lo, hi


def _decade_label(value: float, _pos: int) -> str:
    return f"1e{round(math.log10(value))}"


def _set_decades(axis: Axis, decades: tuple[int, int]) -> None:
    axis.set_major_locator(ticker.FixedLocator([10.0**k for k in range(decades[0], decades[1] + 1)]))
    axis.set_minor_locator(ticker.NullLocator())
    axis.set_major_formatter(ticker.FuncFormatter(_decade_label))


def emit_loglog_plot(
    curves: Sequence[Curve],
    axis_label: str,
    fit: PowerLawFit | None = None,
    y_label: str = "validation loss L",
) -> str:
    """SVG of ``curves`` on log-log axes, with an optional fitted power law.

    Both axes span whole decades with a major tick at each power of ten.
    Each curve is one line through its points sorted by x (SVG id
    ``curve-<i>``); the fit is a straight dashed line over the plotted x
    range (id ``fit``), with alpha and beta in the legend.

    Raises:
        ContractError: If a curve is empty or holds a non-positive value; the
            message names the curve.

    Examples:
        >>> svg = emit_loglog_plot([Curve("transformer", [(1e13, 9.0), (1e17, 2.0)])], "C")
        >>> svg.count('id="xtick_')
        5
    """
    _check_positive(curves)
    xs = [x for c in curves for x, _ in c.points]
    ys = [y for c in curves for _, y in c.points]
    x_lo, x_hi = min(xs), max(xs)
    if fit is not None:
        ys += [fit.predict(x_lo), fit.predict(x_hi)]
    x_decades, y_decades = decade_range(xs), decade_range(ys)

    def draw(fig: Figure) -> None:
        ax = fig.subplots()
        fig.subplots_adjust(left=0.12, right=0.68, top=0.94, bottom=0.12)
        ax.set_xscale("log")
        ax.set_yscale("log")
        for i, curve in enumerate(curves):
            px, py = zip(*sorted(curve.points))
            ax.plot(px, py, marker="o", markersize=4, color=PALETTE[i % len(PALETTE)], label=curve.label, gid=f"curve-{i}")
        if fit is not None:
            label = f"fit: alpha = {fit.alpha:.4g}\nbeta = {fit.beta:.4g}\nR^2 = {fit.r_squared:.4f}"
            ax.plot(
                [x_lo, x_hi],
                [fit.predict(x_lo), fit.predict(x_hi)],
                linestyle="--",
                color=FIT_COLOR,
                label=label,
                gid="fit",
            )
        ax.set_xlim(10.0 ** x_decades[0], 10.0 ** x_decades[1])
        ax.set_ylim(10.0 ** y_decades[0], 10.0 ** y_decades[1])
        _set_decades(ax.xaxis, x_decades)
        _set_decades(ax.yaxis, y_decades)
        ax.set_xlabel(axis_label)
        ax.set_ylabel(y_label)
        ax.grid(True, which="major", linewidth=0.5, alpha=0.4)
        ax.legend(loc="upper left", bbox_to_anchor=(1.02, 1.0), frameon=False)

    return render_svg(draw, FIGURE_SIZE)


def loglog_csv(curves: Sequence[Curve], fit: PowerLawFit | None = None) -> str:
    """The plotted points as CSV with columns ``series,x,y``.

    Fit rows carry the fitted loss at every plotted x.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for curve in curves:
        for x, y in sorted(curve.points):
            writer.writerow([curve.label, repr(float(x)), repr(float(y))])
    if fit is not None:
        for x in sorted({x for c in curves for x, _ in c.points}):
            writer.writerow(["fit", repr(float(x)), repr(fit.predict(x))])
    return buffer.getvalue()


def write_loglog_plot(
    path: str | Path,
    curves: Sequence[Curve],
    axis_label: str,
    fit: PowerLawFit | None = None,
) -> tuple[Path, Path]:
    """Write ``<path>`` (SVG) and the companion CSV next to it."""
    svg_path = Path(path)
    csv_path = svg_path.with_suffix(".csv")
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(emit_loglog_plot(curves, axis_label, fit), encoding="utf-8")
    csv_path.write_text(loglog_csv(curves, fit), encoding="utf-8")
    logger.info(f"Wrote {svg_path} and {csv_path}")
    return svg_path, csv_path
