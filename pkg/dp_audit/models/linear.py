"""
Linear models, the prediction rule, and signed and angular margins.

A model is a weight vector whose last coordinate multiplies the constant
bias feature. Predictions follow the sign of the score with ties at exactly
zero mapped to +1.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.errors import DegenerateExampleError, DomainError, ShapeError
from ..core.numerics import SpdMatrix, quadratic_form, quadratic_forms


def _frozen_vector(values: ArrayLike, name: str) -> NDArray[np.float64]:
    vec = np.array(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise ShapeError(f"{name} must be a nonempty 1-D vector")
    if not np.all(np.isfinite(vec)):
        raise DomainError(f"{name} must have finite coordinates")
    vec.setflags(write=False)
    return vec


def _check_label(y: int) -> int:
    if y not in (-1, 1):
        raise DomainError(f"label must be -1 or +1, got {y}")
    return int(y)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Weight vector theta of a linear classifier."""

    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "weights", _frozen_vector(self.weights, "weights")
        )

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def score(self, x: ArrayLike) -> float:
        vec = np.asarray(x, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise ShapeError(
                f"feature vector of shape {vec.shape} does not match "
                f"model dimension {self.dim}"
            )
        return float(self.weights @ vec)

    def scores(self, features: NDArray[np.float64]) -> NDArray[np.float64]:
        if features.ndim != 2 or features.shape[1] != self.dim:
            raise ShapeError(
                f"feature matrix of shape {features.shape} does not match "
                f"model dimension {self.dim}"
            )
        return np.asarray(features @ self.weights)

    def to_dict(self) -> dict[str, Any]:
        return {"weights": [float(w) for w in self.weights]}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "LinearModel":
        if "weights" not in payload:
            raise DomainError("model JSON must contain a 'weights' array")
        return cls(np.asarray(payload["weights"], dtype=np.float64))

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: Path) -> "LinearModel":
        if not path.exists():
            raise FileNotFoundError(f"Model file not found: {path}")
        return cls.from_dict(json.loads(path.read_text()))


@dataclass(frozen=True, eq=False)
class Example:
    """A labelled example (x, s, y) with the bias coordinate set to 1."""

    features: NDArray[np.float64]
    sensitive: str
    label: int

    def __post_init__(self) -> None:
        features = _frozen_vector(self.features, "features")
        if features[-1] != 1.0:
            raise DomainError("last feature coordinate must be exactly 1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "label", _check_label(self.label))


def predict_label(model: LinearModel, x: ArrayLike) -> int:
    """+1 if theta^T x >= 0, else -1."""
    return 1 if model.score(x) >= 0.0 else -1


def predict_labels(
    model: LinearModel, features: NDArray[np.float64]
) -> NDArray[np.int8]:
    return np.where(model.scores(features) >= 0.0, 1, -1).astype(np.int8)


def signed_margin(model: LinearModel, x: ArrayLike, y: int) -> float:
    """rho = y theta^T x."""
    return _check_label(y) * model.score(x)


def signed_margins(
    model: LinearModel,
    features: NDArray[np.float64],
    labels: NDArray[np.int8],
) -> NDArray[np.float64]:
    return np.asarray(labels * model.scores(features), dtype=np.float64)


def angular_margin(
    model: LinearModel,
    x: ArrayLike,
    y: int,
    covariance: Optional[SpdMatrix] = None,
) -> float:
    """
    alpha = y theta^T x / sqrt(x^T Sigma x).

    With the identity covariance this is the signed margin divided by the
    Euclidean norm of x.
    """
    rho = signed_margin(model, x, y)
    vec = np.asarray(x, dtype=np.float64)
    if covariance is None:
        scale = float(vec @ vec)
    else:
        scale = quadratic_form(vec, covariance)
    if scale <= 0.0:
        raise DegenerateExampleError(
            "x^T Sigma x is zero; the angular margin is undefined"
        )
    return rho / float(np.sqrt(scale))


def angular_margins(
    model: LinearModel,
    features: NDArray[np.float64],
    labels: NDArray[np.int8],
    covariance: Optional[SpdMatrix] = None,
) -> NDArray[np.float64]:
    """Vectorized angular margins over the rows of a feature matrix."""
    rho = signed_margins(model, features, labels)
    if covariance is None:
        scales = np.einsum("ij,ij->i", features, features)
    else:
        scales = quadratic_forms(features, covariance)
    degenerate = np.flatnonzero(scales <= 0.0)
    if degenerate.size:
        raise DegenerateExampleError(
            f"x^T Sigma x is zero for rows {degenerate[:10].tolist()}"
        )
    return np.asarray(rho / np.sqrt(scales))


def individual_fairness_constant(model: LinearModel) -> float:
    """
    ||theta||_2, an upper bound on the smallest Lipschitz constant of the
    score (attained when the feature space is open).
    """
    return float(np.linalg.norm(model.weights))
