"""Compute-loss Pareto frontier."""

from __future__ import annotations

from collections.abc import Sequence

from matscale.exceptions import ContractError
from matscale.scaling.types import FrontierPoint


def _as_point(p: FrontierPoint | tuple[float, float]) -> FrontierPoint:
    if isinstance(p, FrontierPoint):
        return p
    flops, loss = p
    return FrontierPoint(flops=float(flops), loss=float(loss))


def pareto_frontier(points: Sequence[FrontierPoint | tuple[float, float]]) -> list[FrontierPoint]:
    """Points not dominated by any point with less or equal compute and lower loss.

    The result is sorted by compute and strictly decreasing in loss. Among
    equal points the one with the smallest ``(run_id, step)`` is kept, so the
    output does not depend on input order or duplication.

    Raises:
        ContractError: If ``points`` is empty.

    Examples:
        >>> [(p.flops, p.loss) for p in pareto_frontier([(1, 10), (2, 5), (3, 7)])]
        [(1.0, 10.0), (2.0, 5.0)]
    """
    if not points:
        raise ContractError("Cannot extract a frontier from no points")
    ordered = sorted((_as_point(p) for p in points), key=lambda p: (p.flops, p.loss, p.run_id, p.step))
    frontier: list[FrontierPoint] = []
    for point in ordered:
        if not frontier or point.loss < frontier[-1].loss:
            frontier.append(point)
    return frontier
