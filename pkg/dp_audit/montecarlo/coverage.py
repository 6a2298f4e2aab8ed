"""
Empirical coverage of the analytical bounds.

A bound at confidence 1 - zeta passes when the fraction of sampled models
whose realized metric it contains is at least 1 - zeta minus three binomial
standard errors.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.errors import ConfigurationError, DomainError
from ..core.logging import get_logger
from ..fairness.reports import INTERVAL_SLACK, NoiseLevelReport
from .sampler import DISAGREEMENT, NORM, SampleRun

logger = get_logger(__name__)


class CoverageResult(BaseModel):
    """Coverage of one bound by one Monte Carlo run."""

    model_config = ConfigDict(frozen=True)

    metric: str
    zeta: float
    nominal: float
    coverage: float = Field(ge=0.0, le=1.0)
    standard_error: float = Field(ge=0.0)
    threshold: float
    passed: bool
    m: int
    band: Optional[tuple[float, float]] = None


def coverage_threshold(zeta: float, m: int) -> float:
    """1 - zeta - 3 sqrt(zeta (1 - zeta) / m)."""
    return 1.0 - zeta - 3.0 * math.sqrt(zeta * (1.0 - zeta) / m)


def _result(
    metric: str,
    inside: np.ndarray,
    zeta: float,
    band: Optional[tuple[float, float]] = None,
) -> CoverageResult:
    m = int(inside.size)
    coverage = float(np.mean(inside))
    threshold = coverage_threshold(zeta, m)
    return CoverageResult(
        metric=metric,
        zeta=zeta,
        nominal=1.0 - zeta,
        coverage=coverage,
        standard_error=math.sqrt(coverage * (1.0 - coverage) / m),
        threshold=threshold,
        passed=coverage >= threshold,
        m=m,
        band=band,
    )


def _check_context(run: SampleRun, report: NoiseLevelReport) -> None:
    problems = []
    if not math.isclose(run.sigma, report.noise.sigma, rel_tol=1e-12):
        problems.append(f"sigma {run.sigma} != {report.noise.sigma}")
    if not math.isclose(
        run.model_norm, report.model_norm, rel_tol=1e-12, abs_tol=1e-15
    ):
        problems.append(
            f"model norm {run.model_norm} != {report.model_norm}"
        )
    if report.bounds and run.n != report.n:
        problems.append(f"dataset size {run.n} != {report.n}")
    if problems:
        raise ConfigurationError(
            "run and report come from different audits: " + "; ".join(problems)
        )


def coverage_check(
    run: SampleRun, report: NoiseLevelReport, zeta: float
) -> list[CoverageResult]:
    """Coverage of every bound at level zeta, norms and disagreement first."""
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"zeta must lie in (0, 1), got {zeta}")
    _check_context(run, report)
    results = []

    norms = run.values(NORM)
    band = run.quantile_band(NORM)
    norm_report = report.norm_at(zeta)
    if norm_report is not None:
        # at sigma = 0 draws and bounds agree only to rounding of the norm
        slack = INTERVAL_SLACK * max(1.0, norm_report.upper_two_sided)
        results.append(
            _result(
                "norm_upper",
                norms <= norm_report.upper + slack,
                zeta,
                band,
            )
        )
        results.append(
            _result(
                "norm_two_sided",
                (norms >= norm_report.lower - slack)
                & (norms <= norm_report.upper_two_sided + slack),
                zeta,
                band,
            )
        )

    disagreement = report.disagreement_at(zeta)
    if disagreement is not None and DISAGREEMENT in run.columns:
        values = run.values(DISAGREEMENT)
        results.append(
            _result(
                DISAGREEMENT,
                values <= disagreement.bound + INTERVAL_SLACK,
                zeta,
                run.quantile_band(DISAGREEMENT),
            )
        )

    for bound in report.bounds_at(zeta):
        values = run.values(bound.metric_id)
        lower, upper = bound.interval_raw
        slack = INTERVAL_SLACK * max(1.0, abs(bound.expected))
        inside = (values >= lower - slack) & (values <= upper + slack)
        results.append(
            _result(
                bound.metric_id,
                inside,
                zeta,
                run.quantile_band(bound.metric_id),
            )
        )

    failed = [r.metric for r in results if not r.passed]
    logger.info(
        "Coverage checked",
        zeta=zeta,
        m=run.count,
        bounds=len(results),
        failed=failed,
    )
    return results


def mc_expectation(run: SampleRun, selector: str) -> tuple[float, float]:
    """Sample mean of a metric and its standard error."""
    values = run.values(selector)
    m = values.size
    if m < 2:
        raise DomainError("need at least two sampled models")
    return float(np.mean(values)), float(
        math.sqrt(np.var(values, ddof=1) / m)
    )


def mc_variance(run: SampleRun, selector: str) -> float:
    """Unbiased sample variance of a metric."""
    values = run.values(selector)
    if values.size < 2:
        raise DomainError("need at least two sampled models")
    return float(np.var(values, ddof=1))
