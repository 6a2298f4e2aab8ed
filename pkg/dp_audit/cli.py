"""
Command-line interface for the audit toolkit.

Every command prints its machine-readable result on stdout and writes the
same document under the output directory. Logs go to stderr.

Exit codes: 0 success, 1 checked failure (coverage, calibration, any other
audit error), 2 usage or configuration error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from .auditor import AuditConfig, DataSource, FairnessAuditor, load_matrix
from .core.config import Settings
from .core.errors import AuditError, ConfigurationError
from .core.logging import (
    bind_run_context,
    get_logger,
    log_error,
    setup_logging,
)
from .core.numerics import SpdMatrix
from .fairness.measures import FairnessKind
from .fairness.reports import sweep_frame
from .ingestion.csv_loader import DatasetSchema, save_csv
from .ingestion.splitting import split
from .ingestion.synthetic import SyntheticSpec, generate_synthetic
from .models.linear import LinearModel
from .privacy.calibration import PrivacyBudget
from .privacy.mechanism import NoiseSpec
from .privacy.posterior import GaussianPrior

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
MIN_SIMULATION_MODELS = 100

SYNTHETIC_SCHEMA = DatasetSchema(
    sensitive_column="group", label_column="label", positive_label="1"
)


def add_data_arguments(parser: argparse.ArgumentParser) -> None:
    data = parser.add_argument_group("data source")
    data.add_argument("--data", type=Path, help="CSV file with a header row")
    data.add_argument("--sensitive-column", help="Sensitive attribute column")
    data.add_argument("--label-column", help="Label column")
    data.add_argument("--positive-label", help="Token of the positive label")
    data.add_argument(
        "--features", nargs="+", help="Feature columns (default: all others)"
    )
    data.add_argument(
        "--categorical",
        nargs="+",
        default=[],
        help="Feature columns to one-hot encode",
    )
    data.add_argument(
        "--synthetic",
        action="store_true",
        help="Use a synthetic two-group population instead of a CSV file",
    )
    data.add_argument("--n", type=int, default=1000, help="Synthetic rows")
    data.add_argument("--p", type=int, default=2, help="Synthetic features")
    data.add_argument(
        "--proportions",
        nargs=2,
        type=float,
        default=[0.5, 0.5],
        help="Synthetic group proportions (default: 0.5 0.5)",
    )
    data.add_argument(
        "--separation",
        type=float,
        default=1.0,
        help="Synthetic class separation (default: 1.0)",
    )
    data.add_argument(
        "--shift",
        type=float,
        default=0.5,
        help="Offset of the second synthetic group (default: 0.5)",
    )
    data.add_argument(
        "--train-fraction",
        type=float,
        help="Train on this fraction, audit on the rest",
    )
    data.add_argument(
        "--standardize",
        action="store_true",
        help="z-score features with train-set statistics",
    )


def add_audit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model", type=Path, help="Model JSON (default: train one)"
    )
    noise = parser.add_argument_group("noise")
    noise.add_argument("--sigma", type=float, help="Explicit noise scale")
    noise.add_argument(
        "--sensitivity", type=float, help="Sensitivity of the learner"
    )
    noise.add_argument(
        "--epsilon-grid", nargs="+", type=float, help="Epsilon values"
    )
    noise.add_argument("--delta", type=float, help="Delta (default: 1/n^2)")
    noise.add_argument(
        "--covariance", type=Path, help="Noise covariance JSON (diag or full)"
    )
    bounds = parser.add_argument_group("bounds")
    bounds.add_argument(
        "--measures",
        nargs="+",
        choices=[k.value for k in FairnessKind],
        default=[
            FairnessKind.ACCURACY_PARITY.value,
            FairnessKind.DEMOGRAPHIC_PARITY.value,
            FairnessKind.EQUAL_OPPORTUNITY.value,
        ],
        help="Fairness measures to audit",
    )
    bounds.add_argument(
        "--zeta", nargs="+", type=float, help="Confidence levels zeta"
    )
    bounds.add_argument(
        "--finite-sample",
        action="store_true",
        help="Add the population correction t to every interval",
    )
    bounds.add_argument("--kappa", type=float)
    bounds.add_argument("--b3", type=float)
    bounds.add_argument("--b4", type=float)
    bounds.add_argument("--d-h", type=int, help="Natarajan dimension")


def create_parser() -> argparse.ArgumentParser:
    """Create the command-line argument parser."""
    parser = argparse.ArgumentParser(
        prog="dp-audit",
        description="Fairness audits of differentially private linear models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Noise scale for a privacy budget
  dp-audit calibrate --epsilon 1 --delta 1e-6 --sensitivity 1

  # Epsilon sweep on a synthetic population
  dp-audit audit --synthetic --n 2000 --sensitivity 0.05 \\
      --epsilon-grid 0.1 1 10

  # Monte Carlo coverage of every bound
  dp-audit simulate --synthetic --sigma 0.5 --models 10000
        """,
    )
    parser.add_argument(
        "--seed", type=int, help="Base random seed (default: settings)"
    )
    parser.add_argument(
        "--out-dir", type=Path, help="Output directory (default: settings)"
    )
    parser.add_argument(
        "--format",
        choices=["json", "csv"],
        default="json",
        help="Format of the result printed on stdout (default: json)",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: settings)",
    )
    parser.add_argument(
        "--log-format",
        choices=["json", "text"],
        help="Log format (default: settings)",
    )

    subparsers = parser.add_subparsers(
        dest="command", help="Available commands", required=True
    )

    calibrate = subparsers.add_parser(
        "calibrate", help="Smallest sigma meeting an (epsilon, delta) budget"
    )
    calibrate.add_argument("--epsilon", type=float, required=True)
    calibrate.add_argument("--delta", type=float, required=True)
    calibrate.add_argument("--sensitivity", type=float, required=True)

    audit = subparsers.add_parser(
        "audit", help="Bounds over an epsilon grid plus a margin table"
    )
    add_data_arguments(audit)
    add_audit_arguments(audit)

    simulate = subparsers.add_parser(
        "simulate", help="Sample private models and check bound coverage"
    )
    add_data_arguments(simulate)
    add_audit_arguments(simulate)
    simulate.add_argument(
        "--models", type=int, help="Number of sampled models m"
    )
    simulate.add_argument("--n-jobs", type=int, help="Parallel workers")

    posterior = subparsers.add_parser(
        "posterior", help="Auditing posterior of the non-private weights"
    )
    posterior.add_argument("--private-model", type=Path, required=True)
    posterior.add_argument("--sigma", type=float, required=True)
    posterior.add_argument("--covariance", type=Path)
    posterior.add_argument("--prior-mean", nargs="+", type=float)
    posterior.add_argument(
        "--prior-scale", type=float, help="eta^2 (omit for a uniform prior)"
    )
    posterior.add_argument("--prior-shape", type=Path)
    posterior.add_argument("--zeta", nargs="+", type=float)
    posterior.add_argument(
        "--measures",
        nargs="+",
        choices=[k.value for k in FairnessKind],
        default=[FairnessKind.ACCURACY_PARITY.value],
    )
    add_data_arguments(posterior)

    noisy_gd = subparsers.add_parser(
        "noisy-gd", help="Stationary law of noisy GD against simulation"
    )
    hessian = noisy_gd.add_mutually_exclusive_group(required=True)
    hessian.add_argument("--hessian", type=Path, help="Hessian JSON")
    hessian.add_argument(
        "--hessian-diag", nargs="+", type=float, help="Diagonal Hessian"
    )
    noisy_gd.add_argument("--eta", type=float, required=True)
    noisy_gd.add_argument("--sigma", type=float, required=True)
    noisy_gd.add_argument("--steps", type=int, default=200_000)
    noisy_gd.add_argument("--burn-in", type=int, default=10_000)
    noisy_gd.add_argument("--theta-star", nargs="+", type=float)
    noisy_gd.add_argument("--theta0", nargs="+", type=float)

    gen_data = subparsers.add_parser(
        "gen-data", help="Write a synthetic dataset and its summary"
    )
    add_data_arguments(gen_data)

    train = subparsers.add_parser(
        "train", help="Train the non-private logistic model"
    )
    add_data_arguments(train)

    split_parser = subparsers.add_parser(
        "split", help="Shuffle split a dataset into train and test CSV files"
    )
    add_data_arguments(split_parser)

    return parser


def build_settings(args: argparse.Namespace) -> Settings:
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["SEED"] = args.seed
    if args.out_dir is not None:
        overrides["OUTPUT_DIRECTORY"] = args.out_dir
    if args.log_level is not None:
        overrides["LOG_LEVEL"] = args.log_level
    if args.log_format is not None:
        overrides["LOG_FORMAT"] = args.log_format
    if getattr(args, "n_jobs", None) is not None:
        overrides["N_JOBS"] = args.n_jobs
    return Settings(**overrides)


def data_source(args: argparse.Namespace, settings: Settings) -> DataSource:
    if args.synthetic:
        return DataSource(
            synthetic=SyntheticSpec.two_groups(
                p=args.p,
                n=args.n,
                proportions=args.proportions,
                separation=args.separation,
                seed=settings.seed,
                shift=args.shift,
            )
        )
    if args.data is None:
        raise ConfigurationError("give --data or --synthetic")
    return DataSource(csv_path=args.data, csv_schema=csv_schema(args))


def csv_schema(args: argparse.Namespace) -> DatasetSchema:
    if args.synthetic:
        return SYNTHETIC_SCHEMA
    missing = [
        flag
        for flag, value in (
            ("--sensitive-column", args.sensitive_column),
            ("--label-column", args.label_column),
            ("--positive-label", args.positive_label),
        )
        if value is None
    ]
    if missing:
        raise ConfigurationError(f"CSV input needs {', '.join(missing)}")
    return DatasetSchema(
        sensitive_column=args.sensitive_column,
        label_column=args.label_column,
        positive_label=args.positive_label,
        feature_columns=tuple(args.features) if args.features else None,
        categorical_columns=tuple(args.categorical),
    )


def audit_config(args: argparse.Namespace, settings: Settings) -> AuditConfig:
    return AuditConfig(
        data=data_source(args, settings),
        model_path=args.model,
        sigma=args.sigma,
        sensitivity=args.sensitivity,
        delta=args.delta,
        epsilon_grid=args.epsilon_grid or list(settings.epsilon_grid),
        covariance_path=args.covariance,
        measures=[FairnessKind(m) for m in args.measures],
        zetas=args.zeta or list(settings.zeta_levels),
        finite_sample=args.finite_sample,
        kappa=args.kappa,
        b3=args.b3,
        b4=args.b4,
        d_h=args.d_h,
        train_fraction=args.train_fraction,
        standardize=args.standardize,
        seed=settings.seed,
    )


def to_json(document: Any) -> str:
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json")
    return json.dumps(document, indent=2, sort_keys=True)


def emit(
    document: Any,
    settings: Settings,
    name: str,
    args: argparse.Namespace,
    frame: Optional[pd.DataFrame] = None,
) -> None:
    """Write the result under the output directory and print it."""
    text = to_json(document)
    (settings.output_directory / f"{name}.json").write_text(text + "\n")
    if args.format == "csv" and frame is not None:
        sys.stdout.write(frame.to_csv(index=False, float_format="%.17g"))
    else:
        print(text)


def handle_calibrate(
    args: argparse.Namespace, auditor: FairnessAuditor
) -> int:
    """Handle the calibrate command."""
    budget = PrivacyBudget(
        epsilon=args.epsilon, delta=args.delta, sensitivity=args.sensitivity
    )
    result = auditor.calibrate(budget)
    document = {"schema_version": auditor.settings.schema_version}
    document.update(result.model_dump(mode="json"))
    emit(document, auditor.settings, "calibration", args)
    return EXIT_OK


def handle_audit(args: argparse.Namespace, auditor: FairnessAuditor) -> int:
    """Handle the audit command."""
    config = audit_config(args, auditor.settings)
    sweep, margins = auditor.audit(config)
    margins.to_csv(
        auditor.settings.output_directory / "margins.csv",
        index=False,
        float_format="%.17g",
    )
    emit(sweep, auditor.settings, "audit", args, sweep_frame(sweep))
    return EXIT_OK


def handle_simulate(
    args: argparse.Namespace, auditor: FairnessAuditor
) -> int:
    """Handle the simulate command."""
    settings = auditor.settings
    m = args.models or settings.mc_models
    if m < MIN_SIMULATION_MODELS:
        raise ConfigurationError(
            f"simulate needs at least {MIN_SIMULATION_MODELS} models, got {m}"
        )
    config = audit_config(args, settings)
    run, report, results = auditor.simulate(config, m)
    run.to_csv(settings.output_directory / "samples.csv")
    document = {
        "schema_version": settings.schema_version,
        "m": m,
        "base_seed": run.base_seed,
        "noise": report.noise.model_dump(mode="json"),
        "coverage": [r.model_dump(mode="json") for r in results],
        "quantile_bands": {
            metric: list(run.quantile_band(metric)) for metric in run.metrics
        },
    }
    frame = pd.DataFrame([r.model_dump(mode="json") for r in results])
    emit(document, settings, "coverage", args, frame)
    failed = [r.metric for r in results if not r.passed]
    if failed:
        print(f"❌ Coverage failed for {failed}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def handle_posterior(
    args: argparse.Namespace, auditor: FairnessAuditor
) -> int:
    """Handle the posterior command."""
    settings = auditor.settings
    private = LinearModel.load(args.private_model)
    covariance = (
        load_matrix(args.covariance)
        if args.covariance is not None
        else SpdMatrix.identity(private.dim)
    )
    noise = NoiseSpec(args.sigma, covariance)
    prior = GaussianPrior(
        mean=None if args.prior_mean is None else np.array(args.prior_mean),
        variance_scale=args.prior_scale,
        shape=(
            None if args.prior_shape is None else load_matrix(args.prior_shape)
        ),
    )
    dataset = None
    if args.synthetic or args.data is not None:
        dataset = auditor.load_dataset(data_source(args, settings))
    law, report = auditor.posterior(
        private.weights,
        noise,
        prior,
        dataset=dataset,
        kinds=[FairnessKind(m) for m in args.measures],
        zetas=args.zeta or list(settings.zeta_levels),
    )
    document = {
        "schema_version": settings.schema_version,
        "posterior": law.to_dict(),
        "uniform_prior": prior.is_uniform,
        "bounds": None if report is None else report.model_dump(mode="json"),
    }
    emit(document, settings, "posterior", args)
    return EXIT_OK


def handle_noisy_gd(
    args: argparse.Namespace, auditor: FairnessAuditor
) -> int:
    """Handle the noisy-gd command."""
    hessian = (
        load_matrix(args.hessian)
        if args.hessian is not None
        else SpdMatrix.diagonal(args.hessian_diag)
    )
    theta_star = (
        np.zeros(hessian.dim)
        if args.theta_star is None
        else np.array(args.theta_star)
    )
    document = auditor.noisy_gd(
        theta_star,
        hessian,
        args.eta,
        args.sigma,
        args.steps,
        args.burn_in,
        theta0=args.theta0,
    )
    emit(document, auditor.settings, "noisy_gd", args)
    return EXIT_OK


def handle_gen_data(
    args: argparse.Namespace, auditor: FairnessAuditor
) -> int:
    """Handle the gen-data command."""
    settings = auditor.settings
    spec = SyntheticSpec.two_groups(
        p=args.p,
        n=args.n,
        proportions=args.proportions,
        separation=args.separation,
        seed=settings.seed,
        shift=args.shift,
    )
    dataset = generate_synthetic(spec)
    save_csv(
        dataset, settings.output_directory / "synthetic.csv", SYNTHETIC_SCHEMA
    )
    document = {
        "schema_version": settings.schema_version,
        "spec": spec.model_dump(mode="json"),
        "summary": dataset.summary(),
    }
    emit(document, settings, "dataset_summary", args)
    return EXIT_OK


def handle_train(args: argparse.Namespace, auditor: FairnessAuditor) -> int:
    """Handle the train command."""
    settings = auditor.settings
    dataset = auditor.load_dataset(data_source(args, settings))
    result = auditor.train(dataset)
    result.model.save(settings.output_directory / "model.json")
    document = {"schema_version": settings.schema_version}
    document.update(result.to_dict())
    emit(document, settings, "training", args)
    return EXIT_OK


def handle_split(args: argparse.Namespace, auditor: FairnessAuditor) -> int:
    """Handle the split command."""
    settings = auditor.settings
    dataset = auditor.load_dataset(data_source(args, settings))
    fraction = args.train_fraction or settings.train_fraction
    train, test = split(dataset, fraction, settings.seed)
    schema = csv_schema(args)
    save_csv(train, settings.output_directory / "train.csv", schema)
    save_csv(test, settings.output_directory / "test.csv", schema)
    document = {
        "schema_version": settings.schema_version,
        "train_fraction": fraction,
        "seed": settings.seed,
        "train": train.summary(),
        "test": test.summary(),
    }
    emit(document, settings, "split", args)
    return EXIT_OK


HANDLERS = {
    "calibrate": handle_calibrate,
    "audit": handle_audit,
    "simulate": handle_simulate,
    "posterior": handle_posterior,
    "noisy-gd": handle_noisy_gd,
    "gen-data": handle_gen_data,
    "train": handle_train,
    "split": handle_split,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        settings = build_settings(args)
    except ValidationError as e:
        print(f"❌ Invalid settings: {e}", file=sys.stderr)
        return EXIT_USAGE
    setup_logging(log_level=settings.log_level, log_format=settings.log_format)
    bind_run_context(args.command, settings.seed)

    try:
        auditor = FairnessAuditor(settings=settings)
        return HANDLERS[args.command](args, auditor)
    except (ConfigurationError, ValidationError) as e:
        log_error(logger, e)
        print(f"❌ Invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AuditError as e:
        log_error(logger, e)
        print(f"❌ {args.command} failed: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        logger.error("CLI execution failed", error=str(e))
        print(f"❌ System error: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
