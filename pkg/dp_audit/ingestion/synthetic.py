"""
Synthetic labelled data with controllable margins.

Each example draws its group, then its label from the group's class balance,
then its features from N(separation * mean, spread^2 I) with the mean of its
(group, label) cell. Separation 0 collapses both classes onto the origin.
"""

from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.logging import get_logger
from ..models.dataset import LabeledDataset

logger = get_logger(__name__)


class GroupSpec(BaseModel):
    """One sensitive group of a synthetic population."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    proportion: float = Field(gt=0.0, le=1.0)
    positive_rate: float = Field(default=0.5, ge=0.0, le=1.0)
    positive_mean: tuple[float, ...]
    negative_mean: tuple[float, ...]
    spread: float = Field(default=1.0, gt=0.0)


class SyntheticSpec(BaseModel):
    """Population of groups plus sample size and seed."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=1)
    n: int = Field(ge=1)
    groups: tuple[GroupSpec, ...] = Field(min_length=1)
    separation: float = Field(default=1.0, ge=0.0)
    seed: int = 0

    @model_validator(mode="after")
    def check_groups(self) -> "SyntheticSpec":
        total = sum(g.proportion for g in self.groups)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"group proportions sum to {total}, not 1")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ValueError("group names must be distinct")
        for g in self.groups:
            lengths = {len(g.positive_mean), len(g.negative_mean)}
            if lengths != {self.p}:
                raise ValueError(
                    f"group '{g.name}' mean vectors must have length {self.p}"
                )
        return self

    @classmethod
    def two_groups(
        cls,
        p: int,
        n: int,
        proportions: Sequence[float] = (0.5, 0.5),
        separation: float = 1.0,
        seed: int = 0,
        shift: float = 0.5,
    ) -> "SyntheticSpec":
        """
        Classes at +/- e_1, the second group offset by `shift` along e_1 so
        the groups see different margin distributions.
        """
        axis = np.zeros(p)
        axis[0] = 1.0
        groups = []
        for name, proportion, offset in zip(
            ("a", "b"), proportions, (0.0, shift)
        ):
            groups.append(
                GroupSpec(
                    name=name,
                    proportion=proportion,
                    positive_mean=tuple(axis * (1.0 + offset)),
                    negative_mean=tuple(-axis * (1.0 - offset)),
                )
            )
        return cls(
            p=p, n=n, groups=tuple(groups), separation=separation, seed=seed
        )


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """i.i.d. draws from the specified population, deterministic in seed."""
    rng = np.random.default_rng(spec.seed)
    proportions = np.array([g.proportion for g in spec.groups])
    membership = rng.choice(
        len(spec.groups), size=spec.n, p=proportions / proportions.sum()
    )
    rates = np.array([g.positive_rate for g in spec.groups])
    labels = np.where(rng.random(spec.n) < rates[membership], 1, -1)

    means = np.empty((spec.n, spec.p))
    spreads = np.empty(spec.n)
    for k, group in enumerate(spec.groups):
        rows = membership == k
        means[rows & (labels == 1)] = group.positive_mean
        means[rows & (labels == -1)] = group.negative_mean
        spreads[rows] = group.spread
    noise = rng.standard_normal((spec.n, spec.p))
    raw = spec.separation * means + spreads[:, None] * noise

    names = np.array([g.name for g in spec.groups])
    dataset = LabeledDataset.from_arrays(
        raw,
        names[membership],
        labels.astype(np.int8),
        feature_names=[f"x{j}" for j in range(spec.p)],
    )
    logger.debug(
        "Generated synthetic dataset",
        n=spec.n,
        p=spec.p,
        separation=spec.separation,
        seed=spec.seed,
    )
    return dataset
