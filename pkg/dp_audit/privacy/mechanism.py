"""
Output perturbation: theta_priv = theta + sigma * L z with L L^T = Sigma.

Random streams are numpy Generators owned by a single caller. Parallel
sampling derives one child stream per model index from a base seed so the
result does not depend on the schedule.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..core.errors import DomainError, ShapeError
from ..core.numerics import SpdMatrix
from ..models.linear import LinearModel


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Noise scale sigma and SPD covariance Sigma of the mechanism."""

    sigma: float
    covariance: SpdMatrix

    def __post_init__(self) -> None:
        if not self.sigma >= 0.0 or not math.isfinite(self.sigma):
            raise DomainError(
                f"sigma must be finite and nonnegative, got {self.sigma}"
            )

    @classmethod
    def isotropic(cls, sigma: float, dim: int) -> "NoiseSpec":
        return cls(sigma=float(sigma), covariance=SpdMatrix.identity(dim))

    @property
    def dim(self) -> int:
        return self.covariance.dim

    def with_sigma(self, sigma: float) -> "NoiseSpec":
        return NoiseSpec(sigma=float(sigma), covariance=self.covariance)

    def check_model(self, model: LinearModel) -> None:
        if model.dim != self.dim:
            raise ShapeError(
                f"model dimension {model.dim} does not match noise "
                f"covariance dimension {self.dim}"
            )


def child_stream(base_seed: int, index: int) -> np.random.Generator:
    """Independent stream number `index` derived from `base_seed`."""
    seq = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(index,))
    return np.random.default_rng(seq)


def perturb(
    model: LinearModel, noise: NoiseSpec, stream: np.random.Generator
) -> LinearModel:
    """One draw of the private model. sigma = 0 returns theta unchanged."""
    noise.check_model(model)
    if noise.sigma == 0.0:
        return model
    z = stream.standard_normal(model.dim)
    shift = noise.sigma * (noise.covariance.lower @ z)
    return LinearModel(model.weights + shift)


def perturb_batch(
    model: LinearModel,
    noise: NoiseSpec,
    count: int,
    stream: np.random.Generator,
) -> NDArray[np.float64]:
    """`count` private weight vectors drawn from a single stream, as rows."""
    noise.check_model(model)
    if count < 1:
        raise DomainError("count must be at least 1")
    base = np.broadcast_to(model.weights, (count, model.dim))
    if noise.sigma == 0.0:
        return np.array(base)
    z = stream.standard_normal((count, model.dim))
    return np.asarray(base + noise.sigma * (z @ noise.covariance.lower.T))


def perturb_indexed(
    model: LinearModel,
    noise: NoiseSpec,
    base_seed: int,
    indices: range,
    out: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    """Private weights for the given model indices, one child stream each."""
    rows = np.empty((len(indices), model.dim)) if out is None else out
    for row, index in enumerate(indices):
        stream = child_stream(base_seed, index)
        rows[row] = perturb(model, noise, stream).weights
    return rows
