"""
Core functionality for the audit toolkit.

This package contains the fundamental components including configuration,
logging, the exception hierarchy and the numerical helpers every bound is
built from.
"""

from .config import Settings
from .logging import setup_logging

__all__ = ["Settings", "setup_logging"]
