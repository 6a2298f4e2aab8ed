"""
Report records for audits of privately released linear models.

Reports are pydantic models so they validate on construction and serialize
to stable JSON. Interval bounds keep both the clipped value (for display)
and the raw value (for coverage checks).
"""

import math
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Annotated

from ..core.logging import get_logger
from ..models.dataset import LabeledDataset
from ..models.linear import LinearModel, individual_fairness_constant
from ..privacy.calibration import CalibrationResult
from ..privacy.mechanism import NoiseSpec
from .bounds import (
    ACCURACY_RANGE,
    FAIRNESS_RANGE,
    ConfidenceInterval,
    MarginProfile,
    confidence_interval,
    finite_sample_correction,
    finite_sample_precondition,
    margin_comparison_bound,
    norm_bounds,
)
from .measures import FairnessMeasure

logger = get_logger(__name__)

Probability = Annotated[float, Field(gt=0.0, lt=1.0)]

OVERALL = "all"
INTERVAL_SLACK = 1e-12


def metric_id(metric: str, group: Union[str, int]) -> str:
    """Column name shared by bound reports and sampled-model tables."""
    return f"{metric}[{group}]"


class NoiseReport(BaseModel):
    """Noise context echoed in every report."""

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(ge=0.0)
    covariance: str = "identity"
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    sensitivity: Optional[float] = None
    condition_value: Optional[float] = None

    @classmethod
    def from_noise(
        cls,
        noise: NoiseSpec,
        calibration: Optional[CalibrationResult] = None,
    ) -> "NoiseReport":
        if calibration is None:
            return cls(
                sigma=noise.sigma, covariance=noise.covariance.describe()
            )
        return cls(
            sigma=noise.sigma,
            covariance=noise.covariance.describe(),
            epsilon=calibration.epsilon,
            delta=calibration.delta,
            sensitivity=calibration.sensitivity,
            condition_value=calibration.condition_value,
        )


class FiniteSampleOptions(BaseModel):
    """Constants of the population (finite-sample) correction."""

    model_config = ConfigDict(frozen=True)

    kappa: Probability = 0.05
    b3: float = Field(default=1.0, gt=0.0)
    b4: float = Field(default=1.0, gt=0.0)
    d_h: Optional[int] = Field(default=None, ge=1)
    label_count: int = Field(default=2, ge=2)


class BoundReport(BaseModel):
    """Expectation, variance bound and Chebyshev interval of one metric."""

    model_config = ConfigDict(frozen=True)

    metric: str
    group: Union[str, int]
    expected: float
    variance_bound: float = Field(ge=0.0)
    zeta: Probability
    interval: tuple[float, float]
    interval_raw: tuple[float, float]
    finite_sample_t: Optional[float] = None
    comparison_interval: Optional[tuple[float, float]] = None
    empirical: float
    noise: NoiseReport
    n: int = Field(ge=1)
    warnings: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_interval(self) -> "BoundReport":
        lower, upper = self.interval
        slack = INTERVAL_SLACK * max(1.0, abs(self.expected))
        if not lower - slack <= self.expected <= upper + slack:
            raise ValueError(
                f"interval [{lower}, {upper}] does not contain the "
                f"expectation {self.expected}"
            )
        return self

    @property
    def metric_id(self) -> str:
        return metric_id(self.metric, self.group)

    @property
    def population_interval(self) -> Optional[tuple[float, float]]:
        """Raw interval widened by the finite-sample term, if computed."""
        if self.finite_sample_t is None:
            return None
        lower, upper = self.interval_raw
        return (lower - self.finite_sample_t, upper + self.finite_sample_t)


class NormBoundReport(BaseModel):
    """Norm bounds on the private weights at one confidence level."""

    model_config = ConfigDict(frozen=True)

    zeta: Probability
    norm: float = Field(ge=0.0)
    upper: float
    lower: float = Field(ge=0.0)
    upper_two_sided: float


class DisagreementReport(BaseModel):
    """Disagreement ratio bound; `bound` is raw, `bound_display` clipped."""

    model_config = ConfigDict(frozen=True)

    zeta: Probability
    mean_probability: float = Field(ge=0.0, le=0.5)
    bound: float = Field(ge=0.0)

    @property
    def bound_display(self) -> float:
        return min(1.0, self.bound)


class NoiseLevelReport(BaseModel):
    """Every bound of an audit at one noise level."""

    model_config = ConfigDict(frozen=True)

    noise: NoiseReport
    n: int
    model_norm: float
    norm_bounds: list[NormBoundReport]
    disagreement: list[DisagreementReport]
    bounds: list[BoundReport]

    def bounds_at(self, zeta: float) -> list[BoundReport]:
        return [b for b in self.bounds if math.isclose(b.zeta, zeta)]

    def norm_at(self, zeta: float) -> Optional[NormBoundReport]:
        return next(
            (r for r in self.norm_bounds if math.isclose(r.zeta, zeta)), None
        )

    def disagreement_at(self, zeta: float) -> Optional[DisagreementReport]:
        return next(
            (r for r in self.disagreement if math.isclose(r.zeta, zeta)), None
        )


class AuditSweep(BaseModel):
    """Reports over an epsilon grid, the data behind figure-style curves."""

    schema_version: str
    dataset: dict[str, Any]
    model_norm: float
    points: list[NoiseLevelReport]

    def curve(self, zeta: float, selector: str) -> list[tuple[float, Any]]:
        """
        (epsilon, value) pairs for one curve: "norm", "disagreement" or a
        metric id such as "accuracy[all]".
        """
        curve = []
        for point in self.points:
            x = point.noise.epsilon
            if selector == "norm":
                curve.append((x, point.norm_at(zeta)))
            elif selector == "disagreement":
                curve.append((x, point.disagreement_at(zeta)))
            else:
                match = [
                    b for b in point.bounds_at(zeta) if b.metric_id == selector
                ]
                curve.append((x, match[0] if match else None))
        return curve


def _bound_report(
    metric: str,
    group: Union[str, int],
    expected: float,
    variance: float,
    zeta: float,
    natural_range: tuple[float, float],
    empirical: float,
    noise: NoiseReport,
    n: int,
    finite_t: Optional[float],
    comparison_width: float,
    warnings: Sequence[str],
) -> BoundReport:
    interval: ConfidenceInterval = confidence_interval(
        expected, variance, zeta, natural_range
    )
    return BoundReport(
        metric=metric,
        group=group,
        expected=expected,
        variance_bound=variance,
        zeta=zeta,
        interval=(interval.lower, interval.upper),
        interval_raw=(interval.raw_lower, interval.raw_upper),
        finite_sample_t=finite_t,
        comparison_interval=(
            empirical - comparison_width,
            empirical + comparison_width,
        ),
        empirical=empirical,
        noise=noise,
        n=n,
        warnings=list(warnings),
    )


def _finite_sample(
    n: int,
    proportions: np.ndarray,
    coefficients: np.ndarray,
    options: FiniteSampleOptions,
    d_h: int,
) -> tuple[float, list[str]]:
    K = int(proportions.size)
    t = finite_sample_correction(
        n,
        K,
        proportions,
        coefficients,
        options.kappa,
        d_h,
        b3=options.b3,
        b4=options.b4,
        label_count=options.label_count,
    )
    required = finite_sample_precondition(proportions, options.kappa)
    warnings = []
    if n < required:
        warnings.append(
            f"proof-constant bound is vacuous: n = {n} is below the "
            f"sample-size condition n >= {math.ceil(required)}"
        )
    return t, warnings


def build_noise_level_report(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    measures: Sequence[FairnessMeasure],
    zetas: Sequence[float],
    noise_report: Optional[NoiseReport] = None,
    finite_sample: Optional[FiniteSampleOptions] = None,
    profile: Optional[MarginProfile] = None,
) -> NoiseLevelReport:
    """
    Assemble norm, disagreement, accuracy and fairness bounds at every
    confidence level for a single noise specification.
    """
    noise_report = noise_report or NoiseReport.from_noise(noise)
    profile = profile or MarginProfile.build(model, noise, dataset)
    sigma = noise.sigma
    n = dataset.n
    d_h = (finite_sample.d_h if finite_sample else None) or model.dim
    norm = individual_fairness_constant(model)

    norm_reports = []
    disagreement_reports = []
    bounds: list[BoundReport] = []
    mean_disagreement = float(
        np.mean(profile.disagreement_probabilities(sigma))
    )

    sensitive_groups = {
        s: np.flatnonzero(dataset.sensitive == s).astype(np.intp)
        for s in dataset.sensitive_values()
    }

    for zeta in zetas:
        nb = norm_bounds(model, noise, zeta)
        norm_reports.append(
            NormBoundReport(
                zeta=zeta,
                norm=norm,
                upper=nb.upper,
                lower=nb.lower,
                upper_two_sided=nb.upper_two_sided,
            )
        )
        disagreement_reports.append(
            DisagreementReport(
                zeta=zeta,
                mean_probability=mean_disagreement,
                bound=mean_disagreement / zeta,
            )
        )

        t, warnings = (None, [])
        if finite_sample is not None:
            t, warnings = _finite_sample(
                n, np.ones(1), np.ones(1), finite_sample, d_h
            )
        bounds.append(
            _bound_report(
                "accuracy",
                OVERALL,
                profile.expected_accuracy(sigma),
                profile.accuracy_variance(sigma),
                zeta,
                ACCURACY_RANGE,
                profile.empirical_accuracy(),
                noise_report,
                n,
                t,
                margin_comparison_bound(
                    model, noise, dataset, zeta, profile=profile
                ),
                warnings,
            )
        )
        for key, indices in sensitive_groups.items():
            bounds.append(
                _bound_report(
                    "accuracy",
                    key,
                    profile.expected_accuracy(sigma, indices),
                    profile.accuracy_variance(sigma, indices),
                    zeta,
                    ACCURACY_RANGE,
                    profile.empirical_accuracy(indices),
                    noise_report,
                    n,
                    None,
                    margin_comparison_bound(
                        model,
                        noise,
                        dataset,
                        zeta,
                        indices=indices,
                        profile=profile,
                    ),
                    [],
                )
            )

        for measure in measures:
            measure.check_dataset(dataset)
            expected_groups = profile.group_expected_accuracies(sigma, measure)
            empirical_groups = profile.group_empirical_accuracies(measure)
            for row, target in enumerate(measure.targets):
                coefficients = measure.coefficients[row]
                t, warnings = (None, [])
                if finite_sample is not None:
                    t, warnings = _finite_sample(
                        n,
                        measure.proportions,
                        np.abs(coefficients),
                        finite_sample,
                        d_h,
                    )
                bounds.append(
                    _bound_report(
                        measure.kind.value,
                        target,
                        measure.combine(row, expected_groups),
                        profile.fairness_variance(sigma, measure, row),
                        zeta,
                        FAIRNESS_RANGE,
                        measure.combine(row, empirical_groups),
                        noise_report,
                        n,
                        t,
                        margin_comparison_bound(
                            model,
                            noise,
                            dataset,
                            zeta,
                            measure,
                            row,
                            profile=profile,
                        ),
                        warnings,
                    )
                )

    logger.debug(
        "Built noise level report",
        sigma=sigma,
        n=n,
        zetas=list(zetas),
        measures=[m.kind.value for m in measures],
        bounds=len(bounds),
    )
    return NoiseLevelReport(
        noise=noise_report,
        n=n,
        model_norm=norm,
        norm_bounds=norm_reports,
        disagreement=disagreement_reports,
        bounds=bounds,
    )


def sweep_frame(sweep: AuditSweep) -> pd.DataFrame:
    """One row per bound of every noise level, for CSV output."""
    rows = []
    for point in sweep.points:
        for bound in point.bounds:
            rows.append(
                {
                    "epsilon": point.noise.epsilon,
                    "delta": point.noise.delta,
                    "sigma": point.noise.sigma,
                    "metric": bound.metric,
                    "group": bound.group,
                    "zeta": bound.zeta,
                    "empirical": bound.empirical,
                    "expected": bound.expected,
                    "variance_bound": bound.variance_bound,
                    "lower": bound.interval[0],
                    "upper": bound.interval[1],
                    "raw_lower": bound.interval_raw[0],
                    "raw_upper": bound.interval_raw[1],
                    "finite_sample_t": bound.finite_sample_t,
                }
            )
        for norm in point.norm_bounds:
            rows.append(
                {
                    "epsilon": point.noise.epsilon,
                    "delta": point.noise.delta,
                    "sigma": point.noise.sigma,
                    "metric": "norm",
                    "group": OVERALL,
                    "zeta": norm.zeta,
                    "empirical": norm.norm,
                    "lower": norm.lower,
                    "upper": norm.upper,
                    "raw_upper": norm.upper_two_sided,
                }
            )
        for disagreement in point.disagreement:
            rows.append(
                {
                    "epsilon": point.noise.epsilon,
                    "delta": point.noise.delta,
                    "sigma": point.noise.sigma,
                    "metric": "disagreement",
                    "group": OVERALL,
                    "zeta": disagreement.zeta,
                    "expected": disagreement.mean_probability,
                    "upper": disagreement.bound_display,
                    "raw_upper": disagreement.bound,
                }
            )
    return pd.DataFrame(rows)
