"""
Monte Carlo validation of the analytical bounds.
"""

from .coverage import (
    CoverageResult,
    coverage_check,
    coverage_threshold,
    mc_expectation,
    mc_variance,
)
from .sampler import SampleRun, empirical_disagreement, sample_models

__all__ = [
    "CoverageResult",
    "SampleRun",
    "coverage_check",
    "coverage_threshold",
    "empirical_disagreement",
    "mc_expectation",
    "mc_variance",
    "sample_models",
]
