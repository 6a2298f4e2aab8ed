"""
Monte Carlo sampling of private models.

Model i is always drawn from child stream i of the base seed, and chunks are
reassembled in index order, so a run is bit-identical for any number of
workers.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numpy.typing import NDArray

from ..core.errors import ConfigurationError, DomainError, ShapeError
from ..core.logging import get_logger, timed
from ..fairness.measures import FairnessMeasure
from ..fairness.reports import OVERALL, metric_id
from ..models.dataset import LabeledDataset
from ..models.linear import (
    LinearModel,
    individual_fairness_constant,
    predict_labels,
)
from ..privacy.mechanism import NoiseSpec, perturb_indexed

logger = get_logger(__name__)

CHUNK_SIZE = 1024
INDEX = "index"
NORM = "norm"
DISAGREEMENT = "disagreement"


@dataclass(frozen=True, eq=False)
class SampleRun:
    """Per-model records of a Monte Carlo run, one column per metric."""

    base_seed: int
    sigma: float
    model_norm: float
    n: Optional[int]
    columns: dict[str, NDArray[np.float64]] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.columns[INDEX].size)

    @property
    def metrics(self) -> list[str]:
        return [c for c in self.columns if c != INDEX]

    def values(self, selector: str) -> NDArray[np.float64]:
        if selector not in self.columns:
            raise ConfigurationError(
                f"run has no metric '{selector}'; available: {self.metrics}"
            )
        return self.columns[selector]

    def quantile_band(
        self, selector: str, mass: float = 0.99
    ) -> tuple[float, float]:
        """Central band holding `mass` of the realized values."""
        if not 0.0 < mass < 1.0:
            raise DomainError(f"mass must lie in (0, 1), got {mass}")
        tail = 0.5 * (1.0 - mass)
        lo, hi = np.quantile(self.values(selector), [tail, 1.0 - tail])
        return float(lo), float(hi)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.columns)
        frame[INDEX] = frame[INDEX].astype(np.int64)
        return frame

    def to_csv(self, path: Path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")


def _group_indices(dataset: LabeledDataset) -> dict[str, NDArray[np.intp]]:
    return {
        s: np.flatnonzero(dataset.sensitive == s).astype(np.intp)
        for s in dataset.sensitive_values()
    }


def _evaluate_chunk(
    model: LinearModel,
    noise: NoiseSpec,
    base_seed: int,
    indices: range,
    dataset: Optional[LabeledDataset],
    measures: Sequence[FairnessMeasure],
) -> dict[str, NDArray[np.float64]]:
    weights = perturb_indexed(model, noise, base_seed, indices)
    columns = {
        INDEX: np.arange(indices.start, indices.stop, dtype=np.float64),
        NORM: np.linalg.norm(weights, axis=1),
    }
    if dataset is None:
        return columns

    scores = dataset.features @ weights.T
    predictions = np.where(scores >= 0.0, 1, -1).astype(np.int8)
    reference = predict_labels(model, dataset.features)
    columns[DISAGREEMENT] = np.mean(
        predictions != reference[:, None], axis=0
    )

    correct = predictions == dataset.labels[:, None]
    columns[metric_id("accuracy", OVERALL)] = correct.mean(axis=0)
    for key, idx in _group_indices(dataset).items():
        columns[metric_id("accuracy", key)] = correct[idx].mean(axis=0)

    for measure in measures:
        accuracies = np.column_stack(
            [correct[g.indices].mean(axis=0) for g in measure.groups]
        )
        for row, target in enumerate(measure.targets):
            realized = measure.constants[row] + (
                accuracies @ measure.coefficients[row]
            )
            columns[metric_id(measure.kind.value, target)] = realized
    return columns


def sample_models(
    model: LinearModel,
    noise: NoiseSpec,
    m: int,
    base_seed: int,
    dataset: Optional[LabeledDataset] = None,
    measures: Sequence[FairnessMeasure] = (),
    n_jobs: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> SampleRun:
    """
    Draw m private models and record their norms and, given a dataset, their
    disagreement with the non-private model, overall and per-group accuracy
    and every requested fairness measure.
    """
    if m < 1:
        raise DomainError(f"need at least one sampled model, got m={m}")
    noise.check_model(model)
    if dataset is not None and dataset.p != model.dim:
        raise ShapeError(
            f"dataset has {dataset.p} features but the model has {model.dim}"
        )
    for measure in measures:
        if dataset is None:
            raise ConfigurationError("fairness measures need a dataset")
        measure.check_dataset(dataset)

    chunks = [
        range(start, min(start + chunk_size, m))
        for start in range(0, m, chunk_size)
    ]
    with timed(logger, "sample_models", m=m, sigma=noise.sigma, n_jobs=n_jobs):
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_evaluate_chunk)(
                model, noise, base_seed, chunk, dataset, measures
            )
            for chunk in chunks
        )

    columns = {
        name: np.concatenate([part[name] for part in parts])
        for name in parts[0]
    }
    return SampleRun(
        base_seed=base_seed,
        sigma=noise.sigma,
        model_norm=individual_fairness_constant(model),
        n=None if dataset is None else dataset.n,
        columns=columns,
    )


def empirical_disagreement(
    model_a: LinearModel, model_b: LinearModel, dataset: LabeledDataset
) -> float:
    """Fraction of examples on which the two models predict differently."""
    if model_a.dim != model_b.dim or model_a.dim != dataset.p:
        raise ShapeError("models and dataset must share one dimension")
    a = predict_labels(model_a, dataset.features)
    b = predict_labels(model_b, dataset.features)
    return float(np.mean(a != b))
