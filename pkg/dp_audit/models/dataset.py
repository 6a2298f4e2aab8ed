"""
Labelled datasets of (x, s, y) rows.

Datasets are immutable; subsets share no mutable state with their parent.
Every row carries the constant-1 bias coordinate in its last position.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.errors import DegenerateGroupError, DomainError, ShapeError
from .linear import Example


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with sensitive attribute and +/-1 labels."""

    features: NDArray[np.float64]
    sensitive: NDArray[np.str_]
    labels: NDArray[np.int8]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        sensitive = np.array(self.sensitive, dtype=str)
        labels = np.array(self.labels)

        if features.ndim != 2 or features.shape[0] == 0:
            raise DegenerateGroupError("dataset must contain at least one row")
        n, p = features.shape
        if sensitive.shape != (n,) or labels.shape != (n,):
            raise ShapeError(
                "features, sensitive values and labels must have the same "
                "number of rows"
            )
        if not np.all(np.isfinite(features)):
            raise DomainError("feature matrix contains non-finite values")
        if not np.all(features[:, -1] == 1.0):
            raise DomainError("last feature column must be the constant 1")
        if not np.all(np.isin(labels, (-1, 1))):
            raise DomainError("labels must be -1 or +1")

        names = tuple(self.feature_names) or tuple(
            [f"x{j}" for j in range(p - 1)] + ["bias"]
        )
        if len(names) != p:
            raise ShapeError(
                f"{len(names)} feature names given for {p} feature columns"
            )

        labels = labels.astype(np.int8)
        for arr in (features, sensitive, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "sensitive", sensitive)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_examples(cls, examples: Sequence[Example]) -> "LabeledDataset":
        if not examples:
            raise DegenerateGroupError("dataset must contain at least one row")
        return cls(
            features=np.vstack([e.features for e in examples]),
            sensitive=np.array([e.sensitive for e in examples], dtype=str),
            labels=np.array([e.label for e in examples], dtype=np.int8),
        )

    @classmethod
    def from_arrays(
        cls,
        raw_features: ArrayLike,
        sensitive: ArrayLike,
        labels: ArrayLike,
        feature_names: Optional[Sequence[str]] = None,
    ) -> "LabeledDataset":
        """Build a dataset from features without the bias column."""
        raw = np.atleast_2d(np.asarray(raw_features, dtype=np.float64))
        features = np.hstack([raw, np.ones((raw.shape[0], 1))])
        names = (
            tuple(feature_names) + ("bias",) if feature_names else tuple()
        )
        return cls(
            features=features,
            sensitive=np.asarray(sensitive, dtype=str),
            labels=np.asarray(labels),
            feature_names=names,
        )

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    def example(self, index: int) -> Example:
        return Example(
            features=self.features[index],
            sensitive=str(self.sensitive[index]),
            label=int(self.labels[index]),
        )

    def subset(self, indices: ArrayLike) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size == 0:
            raise DegenerateGroupError("cannot take an empty subset")
        return LabeledDataset(
            features=self.features[idx],
            sensitive=self.sensitive[idx],
            labels=self.labels[idx],
            feature_names=self.feature_names,
        )

    def sensitive_values(self) -> list[str]:
        return sorted(set(self.sensitive.tolist()))

    def summary(self) -> dict[str, Any]:
        """Provenance summary: n, p, group counts and label balance."""
        groups = Counter(self.sensitive.tolist())
        positives = int(np.sum(self.labels == 1))
        return {
            "n": self.n,
            "p": self.p,
            "feature_names": list(self.feature_names),
            "group_counts": {k: groups[k] for k in sorted(groups)},
            "label_balance": {
                "positive": positives,
                "negative": self.n - positives,
                "positive_rate": positives / self.n,
            },
        }
