"""Log-space power-law fitting and fit diagnostics."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from matscale.exceptions import ContractError
from matscale.scaling.types import FitComparison, LossKind, PowerLawFit

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3


def _log_points(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    if len(points) < MIN_FIT_POINTS:
        raise ContractError(
            f"A power-law fit needs at least {MIN_FIT_POINTS} points, got {len(points)}",
            {"n_points": len(points)},
        )
    values = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n, loss = values[:, 0], values[:, 1]
    if np.any(~np.isfinite(values)) or np.any(n <= 0) or np.any(loss <= 0):
        raise ContractError("Power-law fits need finite, positive axis values and losses")
    log_n = np.log(n)
    if np.ptp(log_n) == 0:
        raise ContractError("All axis values are equal; the exponent is undetermined")
    return log_n, np.log(loss)


def _log_fit(log_n: np.ndarray, log_l: np.ndarray) -> tuple[float, float, np.ndarray]:
    """OLS line through the log points; returns slope, intercept, residuals."""
    slope, intercept = np.polyfit(log_n, log_l, 1)
    residuals = log_l - (slope * log_n + intercept)
    return float(slope), float(intercept), residuals


def fit_power_law(
    points: Sequence[tuple[float, float]],
    axis: str = "N",
    loss_kind: LossKind = "best_val",
    exclusions: Sequence[str] = (),
) -> PowerLawFit:
    """Fit ``L = alpha * N**(-beta)`` by least squares on ``(ln N, ln L)``.

    Args:
        points: ``(N, L)`` pairs, all positive.
        axis: Label of the scaling axis.
        loss_kind: Which loss the points carry, recorded in the result.
        exclusions: Run identifiers already removed from ``points``.

    Returns:
        The fit; ``r_squared`` is computed from the log-space residuals and is
        1 for a constant loss.

    Raises:
        ContractError: For fewer than 3 points, non-positive values or
            identical axis values.

    Examples:
        >>> fit = fit_power_law([(1e3, 12.5), (1e4, 7.16), (1e5, 4.10)], axis="D")
        >>> round(fit.beta, 2)
        0.24
    """
    log_n, log_l = _log_points(points)
    slope, intercept, residuals = _log_fit(log_n, log_l)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((log_l - log_l.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    fit = PowerLawFit(
        alpha=float(np.exp(intercept)),
        beta=-slope,
        r_squared=min(1.0, max(0.0, r_squared)),
        axis=axis,
        n_points=len(points),
        points=[(float(a), float(b)) for a, b in points],
        loss_kind=loss_kind,
        exclusions=list(exclusions),
    )
    logger.debug(f"Fitted {fit.legend()} on {fit.n_points} points")
    return fit


def compare_fits(a: PowerLawFit, b: PowerLawFit, at: float) -> FitComparison:
    """Ratio of the exponents ``beta_a / beta_b`` and of the losses at ``at``.

    Raises:
        ContractError: If ``b`` is flat.
    """
    if b.beta == 0:
        raise ContractError("Cannot compare against a fit with zero exponent")
    return FitComparison(exponent_ratio=a.beta / b.beta, loss_ratio=a.predict(at) / b.predict(at), at=at)


def flag_anomalies(points: Sequence[tuple[float, float]], z_threshold: float = 2.0) -> list[int]:
    """Indices of points whose log residual from a provisional fit is an outlier.

    A point is flagged when its residual lies more than ``z_threshold``
    population standard deviations from the mean residual. Fewer than
    ``MIN_FIT_POINTS + 1`` points, or residuals that are all zero up to
    rounding, flag nothing.
    """
    if len(points) <= MIN_FIT_POINTS:
        return []
    log_n, log_l = _log_points(points)
    _, _, residuals = _log_fit(log_n, log_l)
    spread = float(np.std(residuals))
    if spread <= 1e-12:
        return []
    z = np.abs(residuals - residuals.mean()) / spread
    flagged = [int(i) for i in np.flatnonzero(z > z_threshold)]
    if flagged:
        logger.warning(f"Flagged {len(flagged)} anomalous point(s) at indices {flagged}")
    return flagged
