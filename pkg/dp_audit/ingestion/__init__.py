"""
Dataset ingestion and preparation.

This package loads CSV files, generates synthetic populations, splits and
standardizes datasets, and trains the non-private logistic model.
"""

from .csv_loader import DatasetSchema, load_csv, save_csv
from .splitting import split, split_indices, standardize
from .synthetic import GroupSpec, SyntheticSpec, generate_synthetic
from .trainer import TrainingResult, train_logistic

__all__ = [
    "DatasetSchema",
    "GroupSpec",
    "SyntheticSpec",
    "TrainingResult",
    "generate_synthetic",
    "load_csv",
    "save_csv",
    "split",
    "split_indices",
    "standardize",
    "train_logistic",
]
