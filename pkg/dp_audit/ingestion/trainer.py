"""
Full-batch l2-regularized logistic regression.

    L(theta) = mean_i log(1 + exp(-y_i theta^T x_i)) + l2/2 ||theta||^2

Every coordinate, bias included, is regularized. Steps start at the
learning rate and are halved until the loss decreases enough, so the loss
sequence is nonincreasing.
"""

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy import special

from ..core.errors import DivergenceError, DomainError
from ..core.logging import get_logger, timed
from ..models.dataset import LabeledDataset
from ..models.linear import LinearModel

logger = get_logger(__name__)

MAX_HALVINGS = 60
ARMIJO = 1e-4


def logistic_loss(
    theta: NDArray[np.float64], dataset: LabeledDataset, l2_strength: float
) -> float:
    margins = dataset.labels * (dataset.features @ theta)
    data_term = float(np.mean(np.logaddexp(0.0, -margins)))
    return data_term + 0.5 * l2_strength * float(theta @ theta)


def logistic_gradient(
    theta: NDArray[np.float64], dataset: LabeledDataset, l2_strength: float
) -> NDArray[np.float64]:
    margins = dataset.labels * (dataset.features @ theta)
    weights = -dataset.labels * special.expit(-margins)
    return np.asarray(
        dataset.features.T @ weights / dataset.n + l2_strength * theta
    )


@dataclass(frozen=True, eq=False)
class TrainingResult:
    model: LinearModel
    losses: tuple[float, ...]
    gradient_norm: float
    iterations: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "final_loss": self.losses[-1],
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
        }


def train_logistic(
    dataset: LabeledDataset,
    l2_strength: float = 1.0,
    learning_rate: float = 1.0,
    iterations: int = 500,
    tolerance: float = 1e-10,
) -> TrainingResult:
    """Gradient descent with backtracking from theta = 0."""
    if l2_strength < 0.0:
        raise DomainError("l2_strength must be nonnegative")
    if not learning_rate > 0.0 or iterations < 1:
        raise DomainError("need a positive learning rate and iterations")

    theta = np.zeros(dataset.p)
    loss = logistic_loss(theta, dataset, l2_strength)
    losses = [loss]
    gradient = logistic_gradient(theta, dataset, l2_strength)
    done = 0

    with timed(logger, "train_logistic", n=dataset.n, p=dataset.p):
        for done in range(1, iterations + 1):
            squared = float(gradient @ gradient)
            if math.sqrt(squared) < tolerance:
                break
            step = learning_rate
            for _ in range(MAX_HALVINGS):
                candidate = theta - step * gradient
                trial = logistic_loss(candidate, dataset, l2_strength)
                if not math.isfinite(trial):
                    raise DivergenceError(
                        f"non-finite loss at iteration {done} (step {step})"
                    )
                if trial <= loss - ARMIJO * step * squared:
                    break
                step *= 0.5
            else:
                logger.debug("Line search stalled", iteration=done)
                break
            theta, loss = candidate, trial
            losses.append(loss)
            gradient = logistic_gradient(theta, dataset, l2_strength)

    gradient_norm = float(np.linalg.norm(gradient))
    logger.info(
        "Trained logistic regression",
        iterations=done,
        loss=loss,
        gradient_norm=gradient_norm,
        l2_strength=l2_strength,
    )
    return TrainingResult(
        model=LinearModel(theta),
        losses=tuple(losses),
        gradient_norm=gradient_norm,
        iterations=done,
    )
