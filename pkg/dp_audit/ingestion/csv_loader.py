"""
CSV loading for labelled tabular datasets.

Cells are read as strings and converted column by column so that every
rejection can name the offending row and column. Row numbers count data
rows from 1; the header is not a row.
"""

from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.errors import IngestionError
from ..core.logging import get_logger
from ..models.dataset import LabeledDataset

logger = get_logger(__name__)

MISSING_TOKENS = frozenset({"", "NA", "N/A", "NaN", "nan", "?"})


class DatasetSchema(BaseModel):
    """Column roles of a CSV file."""

    model_config = ConfigDict(frozen=True)

    sensitive_column: str = Field(min_length=1)
    label_column: str = Field(min_length=1)
    positive_label: str = Field(min_length=1)
    # None selects every column that is neither sensitive nor the label
    feature_columns: Optional[tuple[str, ...]] = None
    categorical_columns: tuple[str, ...] = ()

    @model_validator(mode="after")
    def check_disjoint(self) -> "DatasetSchema":
        if self.sensitive_column == self.label_column:
            raise ValueError("sensitive and label columns must differ")
        roles = {self.sensitive_column, self.label_column}
        features = self.feature_columns or ()
        if len(set(features)) != len(features):
            raise ValueError("feature columns must be distinct")
        if roles & set(features):
            raise ValueError(
                "feature columns must not include the sensitive or label "
                "column"
            )
        if self.feature_columns is not None and not set(
            self.categorical_columns
        ) <= set(features):
            raise ValueError("categorical columns must be feature columns")
        return self

    def resolve_features(self, columns: list[str]) -> list[str]:
        if self.feature_columns is not None:
            return list(self.feature_columns)
        roles = {self.sensitive_column, self.label_column}
        return [c for c in columns if c not in roles]


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise IngestionError(f"file not found: {path}")
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError as e:
        raise IngestionError(f"empty file: {path}") from e
    except pd.errors.ParserError as e:
        raise IngestionError(f"malformed CSV {path}: {e}") from e
    if frame.empty:
        raise IngestionError(f"no data rows in {path}")
    return frame


def _first_missing(values: pd.Series) -> Optional[int]:
    missing = values.str.strip().isin(MISSING_TOKENS).to_numpy()
    hits = np.flatnonzero(missing)
    return int(hits[0]) + 1 if hits.size else None


def _labels(values: pd.Series, schema: DatasetSchema) -> np.ndarray:
    row = _first_missing(values)
    if row is not None:
        raise IngestionError(
            "missing label", row=row, column=schema.label_column
        )
    tokens = values.str.strip()
    distinct = sorted(set(tokens))
    negatives = [t for t in distinct if t != schema.positive_label]
    if len(negatives) > 1:
        raise IngestionError(
            f"label column has more than two values {distinct}; positive "
            f"token is '{schema.positive_label}'",
            column=schema.label_column,
        )
    return np.where(tokens == schema.positive_label, 1, -1).astype(np.int8)


def _numeric(values: pd.Series, column: str) -> np.ndarray:
    parsed = pd.to_numeric(values.str.strip(), errors="coerce")
    array = parsed.to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(array))
    if bad.size:
        row = int(bad[0])
        raise IngestionError(
            f"non-numeric feature value '{values.iloc[row]}'",
            row=row + 1,
            column=column,
        )
    return array


def _one_hot(values: pd.Series, column: str) -> tuple[np.ndarray, list[str]]:
    row = _first_missing(values)
    if row is not None:
        raise IngestionError(
            "missing categorical value", row=row, column=column
        )
    tokens = values.str.strip()
    categories = sorted(set(tokens))
    encoded = pd.get_dummies(
        pd.Categorical(tokens, categories=categories), dtype=np.float64
    )
    return encoded.to_numpy(), [f"{column}={c}" for c in categories]


def load_csv(path: Path, schema: DatasetSchema) -> LabeledDataset:
    """
    Load a CSV file into a dataset with the bias column appended.

    Categorical columns are one-hot encoded in sorted category order, so the
    coordinate order of models trained on the result is reproducible.
    """
    path = Path(path)
    frame = _read_frame(path)
    columns = list(frame.columns)
    features = schema.resolve_features(columns)
    for column in [schema.sensitive_column, schema.label_column, *features]:
        if column not in columns:
            raise IngestionError("column not found", column=column)
    if not features:
        raise IngestionError("no feature columns selected")

    sensitive = frame[schema.sensitive_column]
    row = _first_missing(sensitive)
    if row is not None:
        raise IngestionError(
            "missing sensitive value", row=row, column=schema.sensitive_column
        )
    labels = _labels(frame[schema.label_column], schema)

    blocks = []
    names: list[str] = []
    categorical = set(schema.categorical_columns)
    for column in features:
        if column in categorical:
            block, block_names = _one_hot(frame[column], column)
        else:
            block = _numeric(frame[column], column)[:, None]
            block_names = [column]
        blocks.append(block)
        names.extend(block_names)

    dataset = LabeledDataset.from_arrays(
        np.hstack(blocks),
        sensitive.str.strip().to_numpy(dtype=str),
        labels,
        feature_names=names,
    )
    logger.info(
        "Dataset loaded",
        path=str(path),
        n=dataset.n,
        p=dataset.p,
        groups=dataset.sensitive_values(),
    )
    return dataset


def save_csv(
    dataset: LabeledDataset,
    path: Path,
    schema: DatasetSchema,
    negative_label: str = "-1",
) -> None:
    """Write a dataset (bias column dropped) in a form load_csv reads back."""
    if negative_label == schema.positive_label:
        raise IngestionError("negative and positive label tokens coincide")
    frame = pd.DataFrame(
        dataset.features[:, :-1], columns=list(dataset.feature_names[:-1])
    )
    frame[schema.sensitive_column] = dataset.sensitive
    frame[schema.label_column] = np.where(
        dataset.labels == 1, schema.positive_label, negative_label
    )
    frame.to_csv(path, index=False, float_format="%.17g")
