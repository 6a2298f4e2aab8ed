"""
Bayesian auditing posterior.

An auditor who observes theta_priv = theta + sigma * xi with xi ~ N(0, Sigma)
and holds the prior theta ~ N(mu, eta^2 A) obtains the Gaussian posterior

    mean = mu + A [A + (sigma^2/eta^2) Sigma]^-1 (theta_priv - mu)
    cov  = A [A + (sigma^2/eta^2) Sigma]^-1 sigma^2 Sigma

which tends to N(theta_priv, sigma^2 Sigma) under a uniform prior.
"""

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..core.errors import DomainError, NotSpdError, ShapeError
from ..core.numerics import SpdMatrix
from .mechanism import NoiseSpec

# eigenvalues down to -PSD_RTOL * lambda_max count as rounding of zero
PSD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianLaw:
    """Multivariate normal law; a zero covariance is a point mass."""

    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=np.float64)
        cov = np.array(self.covariance, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ShapeError(
                f"mean of shape {mean.shape} and covariance of shape "
                f"{cov.shape} are inconsistent"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DomainError("Gaussian law has non-finite entries")
        cov = 0.5 * (cov + cov.T)
        if np.any(cov):
            eigenvalues = linalg.eigvalsh(cov, check_finite=False)
            floor = -PSD_RTOL * max(float(eigenvalues[-1]), 0.0)
            if eigenvalues[0] < floor:
                raise NotSpdError(
                    "negative eigenvalue",
                    f"covariance has lambda_min = {eigenvalues[0]:.3e}",
                )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def as_noise(self, sigma: float) -> NoiseSpec:
        """
        Express the law's spread as sigma^2 * Sigma so the perturbation bounds
        apply around its mean.
        """
        if not sigma > 0.0:
            raise DomainError("normalising the law needs a positive sigma")
        return NoiseSpec(
            sigma=sigma,
            covariance=SpdMatrix.from_array(self.covariance / sigma**2),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
        }


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Prior N(mu, eta^2 A); variance_scale None means a uniform prior."""

    mean: Optional[NDArray[np.float64]] = None
    variance_scale: Optional[float] = None
    shape: Optional[SpdMatrix] = None

    def __post_init__(self) -> None:
        if self.variance_scale is not None and not (
            self.variance_scale > 0.0 and math.isfinite(self.variance_scale)
        ):
            raise DomainError("prior variance scale eta^2 must be positive")

    @classmethod
    def uniform(cls) -> "GaussianPrior":
        return cls()

    @property
    def is_uniform(self) -> bool:
        return self.variance_scale is None


def auditing_posterior(
    theta_priv: ArrayLike, noise: NoiseSpec, prior: GaussianPrior
) -> GaussianLaw:
    """Posterior of the non-private weights given their private release."""
    observed = np.asarray(theta_priv, dtype=np.float64)
    p = noise.dim
    if observed.shape != (p,):
        raise ShapeError(
            f"private model of shape {observed.shape} does not match noise "
            f"dimension {p}"
        )
    noise_cov = noise.sigma**2 * noise.covariance.entries
    if prior.is_uniform:
        return GaussianLaw(mean=observed.copy(), covariance=noise_cov)

    mu = np.zeros(p) if prior.mean is None else np.asarray(prior.mean)
    shape = np.eye(p) if prior.shape is None else prior.shape.entries
    if mu.shape != (p,) or shape.shape != (p, p):
        raise ShapeError("prior mean or shape does not match dimension")
    assert prior.variance_scale is not None

    combined = shape + (noise.sigma**2 / prior.variance_scale) * (
        noise.covariance.entries
    )
    # gain = A M^-1, obtained from M^T gain^T = A^T with M symmetric
    gain = linalg.solve(combined, shape.T, assume_a="sym").T
    mean = mu + gain @ (observed - mu)
    return GaussianLaw(mean=mean, covariance=gain @ noise_cov)
