"""
Group fairness measures in coefficient form.

Every supported measure is an affine combination of per-group accuracies,

    F_k(h) = C_k^0 + sum_k' C_k^k' A(h, D_k'),

over a partition of the dataset into groups D_k'. The partition and the
coefficients depend only on the dataset, never on the model.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from numpy.typing import NDArray

from ..core.errors import ConfigurationError, DegenerateGroupError
from ..models.dataset import LabeledDataset


class FairnessKind(str, Enum):
    ACCURACY_PARITY = "accuracy_parity"
    DEMOGRAPHIC_PARITY = "demographic_parity"
    EQUAL_OPPORTUNITY = "equal_opportunity"
    # y = -1 component of equalized odds (true-negative-rate parity)
    EQUAL_OPPORTUNITY_NEGATIVE = "equal_opportunity_negative"


@dataclass(frozen=True, eq=False)
class GroupView:
    """Indices of one partition cell and its empirical proportion."""

    key: str
    indices: NDArray[np.intp]
    proportion: float

    @property
    def count(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True, eq=False)
class FairnessMeasure:
    """
    Partition of a dataset plus, for each target k, the constant C_k^0 and
    the coefficient row (C_k^1 ... C_k^K) over the partition cells.
    """

    kind: FairnessKind
    groups: tuple[GroupView, ...]
    targets: tuple[str, ...]
    constants: NDArray[np.float64]
    coefficients: NDArray[np.float64]
    n: int

    def target_index(self, k: Union[int, str]) -> int:
        if isinstance(k, str):
            if k not in self.targets:
                raise ConfigurationError(
                    f"{self.kind.value} has no target group '{k}'; "
                    f"available: {list(self.targets)}"
                )
            return self.targets.index(k)
        if not 0 <= k < len(self.targets):
            raise ConfigurationError(
                f"target index {k} out of range for {self.kind.value}"
            )
        return k

    @property
    def proportions(self) -> NDArray[np.float64]:
        return np.array([g.proportion for g in self.groups])

    def combine(
        self, k: Union[int, str], accuracies: NDArray[np.float64]
    ) -> float:
        """C_k^0 + sum_k' C_k^k' a_k' for per-group values a."""
        row = self.target_index(k)
        return float(self.constants[row] + self.coefficients[row] @ accuracies)

    def check_dataset(self, dataset: LabeledDataset) -> None:
        if dataset.n != self.n:
            raise ConfigurationError(
                f"measure was built on {self.n} rows but the dataset has "
                f"{dataset.n}"
            )


def _partition(
    keys: list[str], group_of_row: NDArray[np.str_], n: int
) -> tuple[GroupView, ...]:
    views = []
    for key in keys:
        idx = np.flatnonzero(group_of_row == key).astype(np.intp)
        if idx.size == 0:
            continue
        idx.setflags(write=False)
        views.append(GroupView(key=key, indices=idx, proportion=idx.size / n))
    return tuple(views)


def _cell_key(s: str, y: int) -> str:
    return f"{s}|{'+' if y == 1 else '-'}"


def _accuracy_parity(dataset: LabeledDataset) -> FairnessMeasure:
    values = dataset.sensitive_values()
    groups = _partition(values, dataset.sensitive, dataset.n)
    props = np.array([g.proportion for g in groups])
    coefficients = np.eye(len(groups)) - props[None, :]
    return FairnessMeasure(
        kind=FairnessKind.ACCURACY_PARITY,
        groups=groups,
        targets=tuple(g.key for g in groups),
        constants=np.zeros(len(groups)),
        coefficients=coefficients,
        n=dataset.n,
    )


def _cells(dataset: LabeledDataset) -> tuple[GroupView, ...]:
    cell_of_row = np.array(
        [
            _cell_key(s, int(y))
            for s, y in zip(dataset.sensitive, dataset.labels)
        ]
    )
    keys = [
        _cell_key(s, y) for s in dataset.sensitive_values() for y in (1, -1)
    ]
    return _partition(keys, cell_of_row, dataset.n)


def _demographic_parity(dataset: LabeledDataset) -> FairnessMeasure:
    # P(yhat=1 | s') = q A(s',+) + (1 - q)(1 - A(s',-)) with q = P(Y=1 | s'),
    # and F_s = sum_s' w_s' P(yhat=1 | s') with w_s' = 1{s'=s} - P(s')
    groups = _cells(dataset)
    index = {g.key: i for i, g in enumerate(groups)}
    values = dataset.sensitive_values()
    share = {s: float(np.mean(dataset.sensitive == s)) for s in values}
    pos_rate = {
        s: float(np.mean(dataset.labels[dataset.sensitive == s] == 1))
        for s in values
    }

    constants = np.zeros(len(values))
    coefficients = np.zeros((len(values), len(groups)))
    for row, s in enumerate(values):
        for other in values:
            w = (1.0 if other == s else 0.0) - share[other]
            q = pos_rate[other]
            constants[row] += w * (1.0 - q)
            if _cell_key(other, 1) in index:
                coefficients[row, index[_cell_key(other, 1)]] = w * q
            if _cell_key(other, -1) in index:
                coefficients[row, index[_cell_key(other, -1)]] = -w * (1.0 - q)
    return FairnessMeasure(
        kind=FairnessKind.DEMOGRAPHIC_PARITY,
        groups=groups,
        targets=tuple(values),
        constants=constants,
        coefficients=coefficients,
        n=dataset.n,
    )


def _conditional_parity(
    dataset: LabeledDataset, label: int, kind: FairnessKind
) -> FairnessMeasure:
    # F_s = A(s,y) - sum_s' P(s' | Y=y) A(s',y)
    groups = _cells(dataset)
    index = {g.key: i for i, g in enumerate(groups)}
    conditioned = dataset.labels == label
    if not np.any(conditioned):
        raise DegenerateGroupError(
            f"{kind.value} needs at least one example with label {label:+d}"
        )
    values = dataset.sensitive_values()
    for s in values:
        if _cell_key(s, label) not in index:
            raise DegenerateGroupError(
                f"{kind.value}: group '{s}' has no example with label "
                f"{label:+d}"
            )
    share = {
        s: float(np.mean(dataset.sensitive[conditioned] == s)) for s in values
    }
    coefficients = np.zeros((len(values), len(groups)))
    for row, s in enumerate(values):
        for other in values:
            col = index[_cell_key(other, label)]
            coefficients[row, col] = (1.0 if other == s else 0.0) - share[
                other
            ]
    return FairnessMeasure(
        kind=kind,
        groups=groups,
        targets=tuple(values),
        constants=np.zeros(len(values)),
        coefficients=coefficients,
        n=dataset.n,
    )


def build_measure(
    kind: Union[FairnessKind, str], dataset: LabeledDataset
) -> FairnessMeasure:
    """Partition and coefficients of a fairness notion on a dataset."""
    kind = FairnessKind(kind)
    if kind is FairnessKind.ACCURACY_PARITY:
        return _accuracy_parity(dataset)
    if kind is FairnessKind.DEMOGRAPHIC_PARITY:
        return _demographic_parity(dataset)
    if kind is FairnessKind.EQUAL_OPPORTUNITY:
        return _conditional_parity(dataset, 1, kind)
    return _conditional_parity(dataset, -1, kind)
