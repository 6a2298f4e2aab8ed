"""
Audited objects: linear models, labelled examples and datasets.
"""

from .dataset import LabeledDataset
from .linear import Example, LinearModel

__all__ = ["Example", "LabeledDataset", "LinearModel"]
