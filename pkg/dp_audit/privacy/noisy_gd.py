"""
Noisy gradient descent on a quadratic loss.

With loss 1/2 (theta - theta*)^T H (theta - theta*) the iteration

    theta_{t+1} = theta_t - eta (H (theta_t - theta*) + sigma xi_t)

has, in the small step-size limit, the stationary law
N(theta*, 1/2 sigma^2 eta H^-1), the solution of the Lyapunov condition
Theta H + H Theta = eta sigma^2 I. The simulator below runs the discrete
iteration; its exact stationary covariance solves a discrete Lyapunov
equation and differs from the continuous one by O(eta).
"""

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..core.errors import ConfigurationError, DomainError, ShapeError
from ..core.logging import get_logger
from ..core.numerics import SpdMatrix, eigen_range
from .posterior import GaussianLaw

logger = get_logger(__name__)

CHUNK_SIZE = 65_536


def _check_step(eta: float, sigma: float) -> None:
    if not eta > 0.0 or not math.isfinite(eta):
        raise DomainError(f"learning rate must be positive, got {eta}")
    if not sigma >= 0.0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be nonnegative, got {sigma}")


def noisy_gd_stationary(
    theta_star: ArrayLike, hessian: SpdMatrix, eta: float, sigma: float
) -> GaussianLaw:
    """Continuous-time stationary law N(theta*, 1/2 sigma^2 eta H^-1)."""
    _check_step(eta, sigma)
    center = np.asarray(theta_star, dtype=np.float64)
    if center.shape != (hessian.dim,):
        raise ShapeError("theta* does not match the Hessian dimension")
    covariance = 0.5 * sigma**2 * eta * hessian.inverse()
    return GaussianLaw(mean=center, covariance=covariance)


def lyapunov_residual(
    covariance: NDArray[np.float64],
    hessian: SpdMatrix,
    eta: float,
    sigma: float,
) -> float:
    """max |Theta H + H Theta - eta sigma^2 I|."""
    h = hessian.entries
    lhs = covariance @ h + h @ covariance
    return float(np.max(np.abs(lhs - eta * sigma**2 * np.eye(hessian.dim))))


def discrete_stationary_covariance(
    hessian: SpdMatrix, eta: float, sigma: float
) -> NDArray[np.float64]:
    """
    Exact stationary covariance of the discrete iteration, solving
    Theta = (I - eta H) Theta (I - eta H)^T + eta^2 sigma^2 I.
    """
    _check_step(eta, sigma)
    check_stability(hessian, eta)
    transition = np.eye(hessian.dim) - eta * hessian.entries
    cov = linalg.solve_discrete_lyapunov(
        transition, (eta * sigma) ** 2 * np.eye(hessian.dim)
    )
    return np.asarray(0.5 * (cov + cov.T))


def check_stability(hessian: SpdMatrix, eta: float) -> float:
    """Return eta * lambda_max(H); raise unless it is below 2."""
    rate = eta * eigen_range(hessian).lambda_max
    if rate >= 2.0:
        raise ConfigurationError(
            f"noisy GD is unstable: eta * lambda_max = {rate:.6g} >= 2"
        )
    return rate


@dataclass(frozen=True, eq=False)
class TrajectoryStatistics:
    """Empirical moments of the post-burn-in iterates."""

    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]
    steps: int
    burn_in: int

    @property
    def samples(self) -> int:
        return self.steps - self.burn_in

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "steps": self.steps,
            "burn_in": self.burn_in,
            "samples": self.samples,
        }


def noisy_gd_simulate(
    theta0: ArrayLike,
    theta_star: ArrayLike,
    hessian: SpdMatrix,
    eta: float,
    sigma: float,
    steps: int,
    burn_in: int,
    stream: np.random.Generator,
) -> TrajectoryStatistics:
    """Run the noisy GD iteration and summarise iterates t > burn_in."""
    _check_step(eta, sigma)
    if not steps > burn_in >= 0:
        raise DomainError(
            f"need steps > burn_in >= 0, got steps={steps}, burn_in={burn_in}"
        )
    rate = check_stability(hessian, eta)
    theta = np.array(theta0, dtype=np.float64)
    center = np.asarray(theta_star, dtype=np.float64)
    p = hessian.dim
    if theta.shape != (p,) or center.shape != (p,):
        raise ShapeError("theta0 and theta* must match the Hessian dimension")

    transition = np.eye(p) - eta * hessian.entries
    kept = np.empty((steps - burn_in, p))
    deviation = theta - center
    for start in range(0, steps, CHUNK_SIZE):
        stop = min(start + CHUNK_SIZE, steps)
        kicks = (eta * sigma) * stream.standard_normal((stop - start, p))
        for offset in range(stop - start):
            deviation = transition @ deviation - kicks[offset]
            t = start + offset + 1
            if t > burn_in:
                kept[t - burn_in - 1] = deviation

    mean = center + kept.mean(axis=0)
    if kept.shape[0] > 1:
        covariance = np.atleast_2d(np.cov(kept, rowvar=False))
    else:
        covariance = np.zeros((p, p))
    logger.debug(
        "Simulated noisy GD",
        steps=steps,
        burn_in=burn_in,
        eta=eta,
        sigma=sigma,
        stability=rate,
    )
    return TrajectoryStatistics(
        mean=mean, covariance=covariance, steps=steps, burn_in=burn_in
    )
