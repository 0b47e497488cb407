"""Learning-rate schedule: linear warmup followed by cosine decay."""

from __future__ import annotations

import math

from matscale.data.split import round_half_away
from matscale.exceptions import ContractError

WARMUP_FRACTION = 0.01
START_FRACTION = 0.2
MIN_FRACTION = 0.01


def warmup_steps(total_steps: int) -> int:
    """``max(1, round(0.01 * total_steps))`` with halves rounded away from zero."""
    return max(1, round_half_away(WARMUP_FRACTION * total_steps))


def lr_at_step(step: int, total_steps: int, max_lr: float) -> float:
    """Learning rate at ``step`` of a run of ``total_steps`` optimizer steps.

    The rate ramps linearly from 20% of ``max_lr`` at step 0 to ``max_lr`` at
    the end of warmup, then follows a half cosine down to 1% of ``max_lr`` at
    ``total_steps``.

    Raises:
        ContractError: If ``step`` is outside ``[0, total_steps]`` or
            ``total_steps`` is not positive.

    Examples:
        >>> round(lr_at_step(0, 1000, 6e-4), 12)
        0.00012
        >>> round(lr_at_step(1000, 1000, 6e-4), 12)
        6e-06
    """
    if total_steps < 1:
        raise ContractError(f"total_steps must be positive, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ContractError(
            f"step {step} outside [0, {total_steps}]",
            {"step": step, "total_steps": total_steps},
        )
    warmup = warmup_steps(total_steps)
    start = START_FRACTION * max_lr
    floor = MIN_FRACTION * max_lr
    if step <= warmup:
        return start + (max_lr - start) * (step / warmup)
    if total_steps == warmup:
        return max_lr
    progress = (step - warmup) / (total_steps - warmup)
    return floor + 0.5 * (max_lr - floor) * (1.0 + math.cos(math.pi * progress))
