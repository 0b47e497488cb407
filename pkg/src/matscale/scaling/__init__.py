"""Scaling sweeps, Pareto frontiers and power-law fits."""

from matscale.scaling.diagnostics import (
    BaselineReport,
    detect_zero_force_collapse,
    evaluate_baseline,
)
from matscale.scaling.fit import compare_fits, fit_power_law, flag_anomalies
from matscale.scaling.frontier import frontier_fit, frontier_points
from matscale.scaling.io import load_manifest, read_fits, read_runs, write_fits, write_runs
from matscale.scaling.pareto import pareto_frontier
from matscale.scaling.sweep import fit_sweep, plan_cells, run_sweep
from matscale.scaling.types import (
    DatasetSpec,
    FitComparison,
    FrontierPoint,
    PowerLawFit,
    SweepSpec,
)

__all__ = [
    "BaselineReport",
    "DatasetSpec",
    "FitComparison",
    "FrontierPoint",
    "PowerLawFit",
    "SweepSpec",
    "compare_fits",
    "detect_zero_force_collapse",
    "evaluate_baseline",
    "fit_power_law",
    "fit_sweep",
    "flag_anomalies",
    "frontier_fit",
    "frontier_points",
    "load_manifest",
    "pareto_frontier",
    "plan_cells",
    "read_fits",
    "read_runs",
    "run_sweep",
    "write_fits",
    "write_runs",
]
