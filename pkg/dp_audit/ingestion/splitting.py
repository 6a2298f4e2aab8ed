"""
Train/test splitting and train-set standardization.
"""

from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..core.errors import DomainError
from ..models.dataset import LabeledDataset


def split_indices(
    n: int, train_fraction: float, seed: int
) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    """Shuffled disjoint index sets of sizes round(f n) and the rest."""
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(
            f"train fraction must lie in (0, 1), got {train_fraction}"
        )
    if n < 2:
        raise DomainError("need at least two rows to split")
    size = min(max(int(round(train_fraction * n)), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n).astype(np.intp)
    return np.sort(order[:size]), np.sort(order[size:])


def split(
    dataset: LabeledDataset, train_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    train, test = split_indices(dataset.n, train_fraction, seed)
    return dataset.subset(train), dataset.subset(test)


def standardize(
    train: LabeledDataset, test: LabeledDataset
) -> tuple[LabeledDataset, LabeledDataset, dict[str, Any]]:
    """
    z-score every non-bias column with train statistics. Constant columns
    are centred only.
    """
    raw = train.features[:, :-1]
    mean = raw.mean(axis=0)
    scale = raw.std(axis=0)
    scale[scale == 0.0] = 1.0

    def apply(dataset: LabeledDataset) -> LabeledDataset:
        features = np.array(dataset.features)
        features[:, :-1] = (features[:, :-1] - mean) / scale
        return LabeledDataset(
            features=features,
            sensitive=dataset.sensitive,
            labels=dataset.labels,
            feature_names=dataset.feature_names,
        )

    stats = {
        "columns": list(train.feature_names[:-1]),
        "mean": mean.tolist(),
        "scale": scale.tolist(),
    }
    return apply(train), apply(test), stats
