"""Compute-axis fits over the loss-versus-FLOPs frontier of many runs."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import Literal

from matscale.exceptions import ContractError
from matscale.scaling.fit import MIN_FIT_POINTS, fit_power_law
from matscale.scaling.pareto import pareto_frontier
from matscale.scaling.types import FrontierPoint, PowerLawFit
from matscale.training.records import RunRecord

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 2


def frontier_points(
    records: Sequence[RunRecord],
    burn_in: int = DEFAULT_BURN_IN,
    curve: Literal["val", "train"] = "val",
) -> list[FrontierPoint]:
    """All ``(C, L)`` observations of ``records`` after dropping early noise.

    For the validation curve the first ``burn_in`` validation events of each
    run are dropped; for the train curve, the steps of its first ``burn_in``
    epochs. Failed runs contribute nothing.
    """
    if burn_in < 0:
        raise ContractError(f"burn_in must be non-negative, got {burn_in}")
    points: list[FrontierPoint] = []
    for record in records:
        if record.status == "failed":
            continue
        if curve == "val":
            points += [
                FrontierPoint(flops=v.flops, loss=v.loss.total, run_id=record.run_id, step=v.step)
                for v in record.validations[burn_in:]
            ]
        else:
            points += [
                FrontierPoint(flops=s.flops, loss=s.train_total, run_id=record.run_id, step=s.step)
                for s in record.steps
                if s.epoch > burn_in
            ]
    return points


def frontier_fit(
    records: Sequence[RunRecord],
    burn_in: int = DEFAULT_BURN_IN,
    curve: Literal["val", "train"] = "val",
    exclude: Sequence[str] = (),
) -> PowerLawFit:
    """Fit ``L = alpha * C**(-beta)`` to the Pareto frontier of ``records``.

    Args:
        records: Runs contributing points.
        burn_in: Early validation events (or epochs, for the train curve)
            dropped from each run.
        curve: ``val`` for validation points, ``train`` for per-step losses.
        exclude: Run identifiers left out and recorded in the fit.

    Raises:
        ContractError: If fewer than 3 frontier points survive.
    """
    kept = [r for r in records if r.run_id not in set(exclude)]
    points = [p for p in frontier_points(kept, burn_in, curve) if p.flops > 0 and p.loss > 0]
    if not points:
        raise ContractError("No compute points survive the burn-in", {"burn_in": burn_in})
    frontier = pareto_frontier(points)
    if len(frontier) < MIN_FIT_POINTS:
        raise ContractError(
            f"Frontier has {len(frontier)} points; a fit needs at least {MIN_FIT_POINTS}",
            {"n_points": len(frontier)},
        )
    fit = fit_power_law(
        [(p.flops, p.loss) for p in frontier],
        axis="C",
        loss_kind="frontier_val" if curve == "val" else "frontier_train",
        exclusions=sorted(set(exclude)),
    )
    logger.info(f"Compute frontier ({curve}, burn-in {burn_in}): {fit.legend()}")
    return fit
