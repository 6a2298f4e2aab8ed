"""
Fairness and accuracy of privately released models.

Group fairness measures in coefficient form, their closed-form expectations
and variance bounds under output perturbation, and the report records that
carry them.
"""

from .bounds import (
    MarginProfile,
    accuracy_interval,
    accuracy_variance_bound,
    confidence_interval,
    disagreement_probability,
    disagreement_ratio_bound,
    empirical_accuracy,
    empirical_fairness,
    expected_accuracy,
    expected_fairness,
    fairness_variance_bound,
    finite_sample_correction,
    margin_comparison_bound,
    norm_bounds,
)
from .measures import FairnessKind, FairnessMeasure, build_measure
from .reports import (
    AuditSweep,
    BoundReport,
    NoiseLevelReport,
    NoiseReport,
    build_noise_level_report,
    sweep_frame,
)

__all__ = [
    "AuditSweep",
    "BoundReport",
    "FairnessKind",
    "FairnessMeasure",
    "MarginProfile",
    "NoiseLevelReport",
    "NoiseReport",
    "accuracy_interval",
    "accuracy_variance_bound",
    "build_measure",
    "build_noise_level_report",
    "confidence_interval",
    "disagreement_probability",
    "disagreement_ratio_bound",
    "empirical_accuracy",
    "empirical_fairness",
    "expected_accuracy",
    "expected_fairness",
    "fairness_variance_bound",
    "finite_sample_correction",
    "margin_comparison_bound",
    "norm_bounds",
    "sweep_frame",
]
