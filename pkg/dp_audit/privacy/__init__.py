"""
The output perturbation mechanism and its analysis.

Calibration of sigma to a privacy budget, sampling of private models, the
Bayesian auditing posterior and the noisy gradient descent stationary law.
"""

from .calibration import (
    CalibrationResult,
    PrivacyBudget,
    calibrate_sigma,
    privacy_condition,
)
from .mechanism import NoiseSpec, child_stream, perturb, perturb_batch
from .noisy_gd import noisy_gd_simulate, noisy_gd_stationary
from .posterior import GaussianLaw, GaussianPrior, auditing_posterior

__all__ = [
    "CalibrationResult",
    "GaussianLaw",
    "GaussianPrior",
    "NoiseSpec",
    "PrivacyBudget",
    "auditing_posterior",
    "calibrate_sigma",
    "child_stream",
    "noisy_gd_simulate",
    "noisy_gd_stationary",
    "perturb",
    "perturb_batch",
    "privacy_condition",
]
