"""
Test suite for dp_audit.

Covers the numerical core, the privacy mechanism, the fairness bounds and
their Monte Carlo coverage, data ingestion and the command-line interface.
"""
