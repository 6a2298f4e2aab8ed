"""
Calibration of the Gaussian output perturbation mechanism.

The mechanism theta + sigma * xi is (epsilon, delta)-DP exactly when

    g(sigma) = Phi(D/2s - e s/D) - exp(e) Phi(-D/2s - e s/D) <= delta

with D the sensitivity and e = epsilon. g is decreasing in sigma, so the
smallest feasible sigma is found by bracketed bisection.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import special

from ..core.errors import CalibrationError, DomainError
from ..core.logging import get_logger
from ..core.numerics import std_normal_quantile

logger = get_logger(__name__)


class PrivacyBudget(BaseModel):
    """Privacy parameters and sensitivity of the non-private learner."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(ge=0.0, allow_inf_nan=False)
    delta: float = Field(gt=0.0, lt=1.0)
    sensitivity: float = Field(gt=0.0, allow_inf_nan=False)


class CalibrationResult(BaseModel):
    """Calibrated sigma and the privacy condition evaluated there."""

    model_config = ConfigDict(frozen=True)

    sigma: float
    condition_value: float
    epsilon: float
    delta: float
    sensitivity: float


def privacy_condition(sigma: float, budget: PrivacyBudget) -> float:
    """Evaluate g(sigma); the mechanism is private iff g(sigma) <= delta."""
    if not sigma > 0.0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be positive and finite, got {sigma}")
    a = budget.sensitivity / (2.0 * sigma)
    b = budget.epsilon * sigma / budget.sensitivity
    first = float(special.ndtr(a - b))
    # exp(eps) * Phi(.) in log space so large epsilon does not overflow
    second = math.exp(budget.epsilon + float(special.log_ndtr(-a - b)))
    return first - second


def closed_form_sigma_zero_epsilon(budget: PrivacyBudget) -> float:
    """At epsilon = 0 the condition reads 2 Phi(D/2s) - 1 = delta."""
    if budget.epsilon != 0.0:
        raise DomainError("closed form only holds at epsilon = 0")
    return budget.sensitivity / (
        2.0 * std_normal_quantile((1.0 + budget.delta) / 2.0)
    )


def _check_monotone(
    budget: PrivacyBudget, low: float, high: float, points: int
) -> None:
    grid = np.geomspace(low, high, points)
    values = np.array([privacy_condition(float(s), budget) for s in grid])
    increases = np.flatnonzero(np.diff(values) > 1e-15)
    if increases.size:
        i = int(increases[0])
        raise CalibrationError(
            "privacy condition is not decreasing on the bisection bracket: "
            f"g({grid[i]:.6g}) = {values[i]:.6g} < "
            f"g({grid[i + 1]:.6g}) = {values[i + 1]:.6g}"
        )


def calibrate_sigma(
    budget: PrivacyBudget,
    rtol: float = 1e-11,
    max_doublings: int = 200,
    grid_points: int = 100,
) -> CalibrationResult:
    """
    Smallest sigma satisfying the privacy condition.

    The bracket is grown geometrically from sigma = sensitivity, checked for
    monotonicity on a grid, then bisected until its relative width is below
    rtol. The upper end of the final bracket is returned, so g(sigma) <= delta
    always holds for the result.
    """
    delta = budget.delta

    def feasible(sigma: float) -> bool:
        return privacy_condition(sigma, budget) <= delta

    low = high = budget.sensitivity
    if feasible(high):
        for _ in range(max_doublings):
            low /= 2.0
            if not feasible(low):
                break
        else:
            raise CalibrationError(
                f"no infeasible sigma found down to {low:.3e}: "
                f"g = {privacy_condition(low, budget):.6g}"
            )
        high = 2.0 * low
    else:
        for _ in range(max_doublings):
            high *= 2.0
            if feasible(high):
                break
        else:
            raise CalibrationError(
                f"bracket expansion failed after {max_doublings} doublings: "
                f"g({budget.sensitivity:.6g}) = "
                f"{privacy_condition(budget.sensitivity, budget):.6g}, "
                f"g({high:.6g}) = {privacy_condition(high, budget):.6g}, "
                f"delta = {delta}"
            )
        low = high / 2.0

    _check_monotone(budget, low, high, grid_points)

    while high - low > rtol * high:
        mid = 0.5 * (low + high)
        if mid <= low or mid >= high:
            break
        if feasible(mid):
            high = mid
        else:
            low = mid

    value = privacy_condition(high, budget)
    logger.debug(
        "Calibrated noise",
        epsilon=budget.epsilon,
        delta=delta,
        sensitivity=budget.sensitivity,
        sigma=high,
        condition_value=value,
    )
    return CalibrationResult(
        sigma=high,
        condition_value=value,
        epsilon=budget.epsilon,
        delta=delta,
        sensitivity=budget.sensitivity,
    )


def default_delta(n: int, delta: Optional[float] = None) -> float:
    """delta = 1/n^2 unless given explicitly."""
    if delta is not None:
        return delta
    if n < 2:
        raise DomainError("default delta = 1/n^2 needs n >= 2")
    return 1.0 / float(n) ** 2
