"""
Fairness audits of differentially private linear models.

Calibrates the Gaussian output perturbation mechanism, bounds how much the
accuracy, group fairness and individual fairness of the released model can
drift from the non-private one, and checks every bound by Monte Carlo.
"""

__version__ = "1.0.0"

from .core.config import Settings
from .core.logging import setup_logging

__all__ = ["Settings", "setup_logging"]
