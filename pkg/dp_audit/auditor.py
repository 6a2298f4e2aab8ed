"""
Audit orchestrator.

This module provides the main interface of the toolkit, coordinating data
preparation, noise calibration, bound computation, Monte Carlo validation,
the auditing posterior and the noisy gradient descent analysis.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .core.errors import ConfigurationError, IngestionError
from .core.logging import get_logger, timed
from .core.numerics import SpdMatrix
from .fairness.bounds import MarginProfile
from .fairness.measures import FairnessKind, FairnessMeasure, build_measure
from .fairness.reports import (
    AuditSweep,
    FiniteSampleOptions,
    NoiseLevelReport,
    NoiseReport,
    build_noise_level_report,
)
from .ingestion.csv_loader import DatasetSchema, load_csv
from .ingestion.splitting import split, standardize
from .ingestion.synthetic import SyntheticSpec, generate_synthetic
from .ingestion.trainer import TrainingResult, train_logistic
from .models.dataset import LabeledDataset
from .models.linear import LinearModel, angular_margins, signed_margins
from .montecarlo.coverage import CoverageResult, coverage_check
from .montecarlo.sampler import SampleRun, sample_models
from .privacy.calibration import (
    CalibrationResult,
    PrivacyBudget,
    calibrate_sigma,
    default_delta,
)
from .privacy.mechanism import NoiseSpec, child_stream
from .privacy.noisy_gd import (
    discrete_stationary_covariance,
    lyapunov_residual,
    noisy_gd_simulate,
    noisy_gd_stationary,
)
from .privacy.posterior import GaussianLaw, GaussianPrior, auditing_posterior

logger = get_logger(__name__)

DEFAULT_MEASURES = (
    FairnessKind.ACCURACY_PARITY,
    FairnessKind.DEMOGRAPHIC_PARITY,
    FairnessKind.EQUAL_OPPORTUNITY,
)


def load_matrix(path: Path) -> SpdMatrix:
    """
    Read an SPD matrix from JSON: a flat list is a diagonal, a nested list a
    full matrix.
    """
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise IngestionError(f"cannot read matrix file {path}: {e}") from e
    values = np.asarray(payload, dtype=np.float64)
    if values.ndim == 1:
        return SpdMatrix.diagonal(values)
    return SpdMatrix.from_array(values)


class DataSource(BaseModel):
    """Exactly one of a CSV file (with its schema) or a synthetic spec."""

    model_config = ConfigDict(frozen=True)

    csv_path: Optional[Path] = None
    csv_schema: Optional[DatasetSchema] = None
    synthetic: Optional[SyntheticSpec] = None

    @model_validator(mode="after")
    def check_one_source(self) -> "DataSource":
        from_csv = self.csv_path is not None
        if from_csv == (self.synthetic is not None):
            raise ValueError(
                "give exactly one of a CSV path or a synthetic spec"
            )
        if from_csv and self.csv_schema is None:
            raise ValueError("a CSV source needs a schema")
        return self


class AuditConfig(BaseModel):
    """Per-run configuration of an audit."""

    model_config = ConfigDict(frozen=True)

    data: DataSource
    model_path: Optional[Path] = None
    sigma: Optional[float] = Field(default=None, ge=0.0)
    sensitivity: Optional[float] = Field(default=None, gt=0.0)
    delta: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    epsilon_grid: list[float] = Field(default_factory=lambda: [1.0])
    covariance_path: Optional[Path] = None
    measures: list[FairnessKind] = Field(
        default_factory=lambda: list(DEFAULT_MEASURES)
    )
    zetas: list[float] = Field(default_factory=lambda: [0.05])
    finite_sample: bool = False
    kappa: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    b3: Optional[float] = Field(default=None, gt=0.0)
    b4: Optional[float] = Field(default=None, gt=0.0)
    d_h: Optional[int] = Field(default=None, ge=1)
    train_fraction: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    standardize: bool = False
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_noise_source(self) -> "AuditConfig":
        if (self.sigma is None) == (self.sensitivity is None):
            raise ValueError(
                "give exactly one of an explicit sigma or a privacy budget "
                "(sensitivity with an epsilon grid)"
            )
        if self.sensitivity is not None and not self.epsilon_grid:
            raise ValueError("epsilon grid must not be empty")
        if any(e < 0.0 for e in self.epsilon_grid):
            raise ValueError("epsilon values must be nonnegative")
        if not self.zetas or any(not 0.0 < z < 1.0 for z in self.zetas):
            raise ValueError("every zeta must lie in (0, 1)")
        return self


@dataclass(frozen=True, eq=False)
class PreparedAudit:
    """Dataset and model an audit runs on."""

    dataset: LabeledDataset
    model: LinearModel
    training: Optional[dict[str, Any]] = None
    standardization: Optional[dict[str, Any]] = None


class FairnessAuditor:
    """Main audit orchestrator."""

    def __init__(self, settings: Any):
        """Initialize the auditor with settings."""
        self.settings = settings
        logger.info(
            "Fairness auditor initialized",
            seed=settings.seed,
            n_jobs=settings.n_jobs,
            output_directory=str(settings.output_directory),
        )

    def calibrate(self, budget: PrivacyBudget) -> CalibrationResult:
        """Smallest sigma meeting the budget."""
        with timed(logger, "calibrate", epsilon=budget.epsilon):
            return calibrate_sigma(
                budget,
                rtol=self.settings.calibration_rtol,
                max_doublings=self.settings.calibration_max_doublings,
                grid_points=self.settings.monotonicity_grid_points,
            )

    def load_dataset(self, source: DataSource) -> LabeledDataset:
        if source.synthetic is not None:
            return generate_synthetic(source.synthetic)
        assert source.csv_path is not None and source.csv_schema is not None
        return load_csv(source.csv_path, source.csv_schema)

    def train(self, dataset: LabeledDataset) -> TrainingResult:
        return train_logistic(
            dataset,
            l2_strength=self.settings.l2_strength,
            learning_rate=self.settings.learning_rate,
            iterations=self.settings.train_iterations,
        )

    def prepare(self, config: AuditConfig) -> PreparedAudit:
        """
        Load the data, optionally split and standardize it, and obtain the
        non-private model. With a split the model is trained on the train
        part and audited on the held-out part.
        """
        dataset = self.load_dataset(config.data)
        train_set = audit_set = dataset
        if config.train_fraction is not None:
            seed = self.settings.seed if config.seed is None else config.seed
            train_set, audit_set = split(dataset, config.train_fraction, seed)
        stats = None
        if config.standardize:
            train_set, audit_set, stats = standardize(train_set, audit_set)
            if config.train_fraction is None:
                audit_set = train_set

        training = None
        if config.model_path is not None:
            model = LinearModel.load(config.model_path)
        else:
            result = self.train(train_set)
            model, training = result.model, result.to_dict()
        if model.dim != audit_set.p:
            raise ConfigurationError(
                f"model has {model.dim} weights but the data has "
                f"{audit_set.p} features"
            )
        return PreparedAudit(
            dataset=audit_set,
            model=model,
            training=training,
            standardization=stats,
        )

    def covariance(self, config: AuditConfig, dim: int) -> SpdMatrix:
        if config.covariance_path is None:
            return SpdMatrix.identity(dim)
        matrix = load_matrix(config.covariance_path)
        if matrix.dim != dim:
            raise ConfigurationError(
                f"covariance is {matrix.dim}x{matrix.dim}, model has {dim} "
                "weights"
            )
        return matrix

    def finite_sample_options(
        self, config: AuditConfig
    ) -> Optional[FiniteSampleOptions]:
        if not config.finite_sample:
            return None
        return FiniteSampleOptions(
            kappa=config.kappa or self.settings.kappa,
            b3=config.b3 or self.settings.b3,
            b4=config.b4 or self.settings.b4,
            d_h=config.d_h,
        )

    def measures(
        self, kinds: Sequence[FairnessKind], dataset: LabeledDataset
    ) -> list[FairnessMeasure]:
        return [build_measure(kind, dataset) for kind in kinds]

    def audit_noise_level(
        self,
        model: LinearModel,
        noise: NoiseSpec,
        dataset: LabeledDataset,
        measures: Sequence[FairnessMeasure],
        zetas: Sequence[float],
        calibration: Optional[CalibrationResult] = None,
        finite_sample: Optional[FiniteSampleOptions] = None,
        profile: Optional[MarginProfile] = None,
    ) -> NoiseLevelReport:
        """All bounds at one noise level."""
        return build_noise_level_report(
            model,
            noise,
            dataset,
            measures,
            zetas,
            noise_report=NoiseReport.from_noise(noise, calibration),
            finite_sample=finite_sample,
            profile=profile,
        )

    def noise_levels(
        self, config: AuditConfig, n: int, covariance: SpdMatrix
    ) -> list[tuple[NoiseSpec, Optional[CalibrationResult]]]:
        """One noise spec per epsilon, or the explicit sigma."""
        if config.sigma is not None:
            return [(NoiseSpec(config.sigma, covariance), None)]
        assert config.sensitivity is not None
        delta = default_delta(n, config.delta)
        levels = []
        for epsilon in config.epsilon_grid:
            budget = PrivacyBudget(
                epsilon=epsilon, delta=delta, sensitivity=config.sensitivity
            )
            calibration = self.calibrate(budget)
            levels.append(
                (NoiseSpec(calibration.sigma, covariance), calibration)
            )
        return levels

    def sweep(
        self, prepared: PreparedAudit, config: AuditConfig
    ) -> AuditSweep:
        """
        Bounds at every noise level of the config. Margins depend only on
        the covariance, so they are computed once for the whole sweep.
        """
        model, dataset = prepared.model, prepared.dataset
        covariance = self.covariance(config, model.dim)
        measures = self.measures(config.measures, dataset)
        options = self.finite_sample_options(config)
        profile = MarginProfile.build(
            model, NoiseSpec(0.0, covariance), dataset
        )

        points = []
        levels = self.noise_levels(config, dataset.n, covariance)
        with timed(logger, "sweep", n=dataset.n, levels=len(levels)):
            for noise, calibration in levels:
                points.append(
                    self.audit_noise_level(
                        model,
                        noise,
                        dataset,
                        measures,
                        config.zetas,
                        calibration=calibration,
                        finite_sample=options,
                        profile=profile,
                    )
                )

        summary = dataset.summary()
        if prepared.training is not None:
            summary["training"] = prepared.training
        if prepared.standardization is not None:
            summary["standardization"] = prepared.standardization
        return AuditSweep(
            schema_version=self.settings.schema_version,
            dataset=summary,
            model_norm=float(np.linalg.norm(model.weights)),
            points=points,
        )

    def audit(self, config: AuditConfig) -> tuple[AuditSweep, pd.DataFrame]:
        """Full audit: the sweep and the table of margins."""
        logger.info("Starting audit", sigma=config.sigma)
        try:
            prepared = self.prepare(config)
            sweep = self.sweep(prepared, config)
            covariance = self.covariance(config, prepared.model.dim)
            table = self.margin_table(
                prepared.model, covariance, prepared.dataset
            )
        except Exception as e:
            logger.error("Audit failed", error=str(e))
            raise
        logger.info("Audit completed", levels=len(sweep.points))
        return sweep, table

    def margin_table(
        self,
        model: LinearModel,
        covariance: SpdMatrix,
        dataset: LabeledDataset,
    ) -> pd.DataFrame:
        """Signed and angular margin of every example."""
        return pd.DataFrame(
            {
                "index": np.arange(dataset.n),
                "sensitive": dataset.sensitive,
                "label": dataset.labels.astype(np.int64),
                "signed_margin": signed_margins(
                    model, dataset.features, dataset.labels
                ),
                "angular_margin": angular_margins(
                    model,
                    dataset.features,
                    dataset.labels,
                    None if covariance.is_identity() else covariance,
                ),
            }
        )

    def simulate(
        self, config: AuditConfig, m: int, n_jobs: Optional[int] = None
    ) -> tuple[SampleRun, NoiseLevelReport, list[CoverageResult]]:
        """
        Sample m private models at the config's noise level (the first
        epsilon of the grid under a budget) and check every bound's coverage
        at every zeta.
        """
        prepared = self.prepare(config)
        model, dataset = prepared.model, prepared.dataset
        covariance = self.covariance(config, model.dim)
        measures = self.measures(config.measures, dataset)
        noise, calibration = self.noise_levels(config, dataset.n, covariance)[
            0
        ]
        report = self.audit_noise_level(
            model,
            noise,
            dataset,
            measures,
            config.zetas,
            calibration=calibration,
        )
        seed = self.settings.seed if config.seed is None else config.seed
        run = sample_models(
            model,
            noise,
            m,
            seed,
            dataset=dataset,
            measures=measures,
            n_jobs=self.settings.n_jobs if n_jobs is None else n_jobs,
        )
        results = [
            result
            for zeta in config.zetas
            for result in coverage_check(run, report, zeta)
        ]
        failed = [r.metric for r in results if not r.passed]
        if failed:
            logger.warning("Coverage checks failed", failed=failed)
        return run, report, results

    def posterior(
        self,
        theta_priv: ArrayLike,
        noise: NoiseSpec,
        prior: GaussianPrior,
        dataset: Optional[LabeledDataset] = None,
        kinds: Sequence[FairnessKind] = DEFAULT_MEASURES,
        zetas: Sequence[float] = (0.05,),
    ) -> tuple[GaussianLaw, Optional[NoiseLevelReport]]:
        """
        Posterior of the non-private weights and, given a dataset, bounds on
        the non-private model's metrics: the bound machinery is applied
        around the posterior mean with the posterior spread as noise.
        """
        law = auditing_posterior(theta_priv, noise, prior)
        logger.info(
            "Computed auditing posterior",
            sigma=noise.sigma,
            uniform_prior=prior.is_uniform,
        )
        if dataset is None or noise.sigma == 0.0:
            return law, None
        swapped = law.as_noise(noise.sigma)
        report = self.audit_noise_level(
            LinearModel(law.mean),
            swapped,
            dataset,
            self.measures(kinds, dataset),
            zetas,
        )
        return law, report

    def noisy_gd(
        self,
        theta_star: ArrayLike,
        hessian: SpdMatrix,
        eta: float,
        sigma: float,
        steps: int,
        burn_in: int,
        theta0: Optional[ArrayLike] = None,
    ) -> dict[str, Any]:
        """Stationary law of noisy GD against a simulated trajectory."""
        center = np.asarray(theta_star, dtype=np.float64)
        start = center if theta0 is None else np.asarray(theta0, dtype=float)
        law = noisy_gd_stationary(center, hessian, eta, sigma)
        exact = discrete_stationary_covariance(hessian, eta, sigma)
        with timed(logger, "noisy_gd_simulate", steps=steps, eta=eta):
            stats = noisy_gd_simulate(
                start,
                center,
                hessian,
                eta,
                sigma,
                steps,
                burn_in,
                child_stream(self.settings.seed, 0),
            )
        analytic = law.covariance
        diagonal = np.diag(analytic)
        deviation = (
            float(
                np.max(np.abs(np.diag(stats.covariance) - diagonal) / diagonal)
            )
            if sigma > 0.0
            else 0.0
        )
        return {
            "schema_version": self.settings.schema_version,
            "eta": eta,
            "sigma": sigma,
            "stationary": law.to_dict(),
            "discrete_covariance": exact.tolist(),
            "empirical": stats.to_dict(),
            "lyapunov_residual": lyapunov_residual(
                analytic, hessian, eta, sigma
            ),
            "max_relative_deviation": deviation,
        }
