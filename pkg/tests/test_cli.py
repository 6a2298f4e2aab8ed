"""
Tests for the command-line interface.

Commands are driven through run() so exit codes can be checked directly;
every command writes into a temporary output directory.
"""

import json
import os
from pathlib import Path
from typing import Any
from unittest.mock import patch

import pandas as pd
import pytest
from scipy.stats import norm

from dp_audit.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, run
from dp_audit.core.errors import CalibrationError
from dp_audit.montecarlo.coverage import CoverageResult


@pytest.fixture
def out_dir(temp_dir: Path) -> Path:
    """Output directory passed with --out-dir."""
    return temp_dir / "cli_out"


def cli(out_dir: Path, *args: str) -> int:
    return run(["--out-dir", str(out_dir), "--seed", "3", *args])


def read_json(path: Path) -> Any:
    return json.loads(path.read_text())


@pytest.mark.integration
class TestUsage:
    """Test cases for argument handling and exit codes."""

    def test_help(self, capsys: pytest.CaptureFixture) -> None:
        """Test that --help exits cleanly."""
        assert run(["--help"]) == EXIT_OK
        assert "calibrate" in capsys.readouterr().out

    def test_missing_command(self) -> None:
        """Test that a missing subcommand is a usage error."""
        assert run([]) == EXIT_USAGE

    def test_unknown_measure(self, out_dir: Path) -> None:
        """Test that argparse rejects unknown choices."""
        code = cli(
            out_dir,
            "audit",
            "--synthetic",
            "--sigma",
            "0.1",
            "--measures",
            "calibration",
        )
        assert code == EXIT_USAGE

    def test_invalid_settings(self, out_dir: Path) -> None:
        """Test that invalid environment settings are a usage error."""
        with patch.dict(os.environ, {"LOG_FORMAT": "xml"}):
            code = cli(
                out_dir,
                "calibrate",
                "--epsilon",
                "1",
                "--delta",
                "1e-5",
                "--sensitivity",
                "1",
            )
        assert code == EXIT_USAGE


@pytest.mark.integration
class TestCalibrateCommand:
    """Test cases for the calibrate command."""

    def test_writes_result(
        self, out_dir: Path, capsys: pytest.CaptureFixture
    ) -> None:
        """Test that the printed and written documents agree."""
        code = cli(
            out_dir,
            "calibrate",
            "--epsilon",
            "1",
            "--delta",
            "1e-6",
            "--sensitivity",
            "1",
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "calibration.json")
        assert json.loads(capsys.readouterr().out) == document
        assert document["schema_version"] == "1.0"
        assert document["sigma"] > 0.0
        assert document["condition_value"] <= 1e-6

    def test_zero_epsilon(self, out_dir: Path) -> None:
        """Test the closed form D / (2 Phi^-1((1 + delta) / 2))."""
        code = cli(
            out_dir,
            "calibrate",
            "--epsilon",
            "0",
            "--delta",
            "0.5",
            "--sensitivity",
            "1",
        )
        assert code == EXIT_OK
        sigma = read_json(out_dir / "calibration.json")["sigma"]
        assert sigma == pytest.approx(1.0 / (2.0 * norm.ppf(0.75)), rel=1e-8)

    def test_invalid_delta(self, out_dir: Path) -> None:
        """Test that delta outside (0, 1) is a usage error."""
        code = cli(
            out_dir,
            "calibrate",
            "--epsilon",
            "1",
            "--delta",
            "2",
            "--sensitivity",
            "1",
        )
        assert code == EXIT_USAGE

    def test_calibration_failure(self, out_dir: Path) -> None:
        """Test that a failed calibration exits with 1."""
        with patch(
            "dp_audit.auditor.calibrate_sigma",
            side_effect=CalibrationError("no infeasible sigma found"),
        ):
            code = cli(
                out_dir,
                "calibrate",
                "--epsilon",
                "1",
                "--delta",
                "1e-6",
                "--sensitivity",
                "1",
            )
        assert code == EXIT_FAILURE


@pytest.mark.integration
class TestAuditCommand:
    """Test cases for the audit command."""

    def test_synthetic_audit(self, out_dir: Path) -> None:
        """Test the report and margin table of a sigma audit."""
        code = cli(
            out_dir,
            "audit",
            "--synthetic",
            "--n",
            "300",
            "--sigma",
            "0.2",
            "--zeta",
            "0.05",
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "audit.json")
        assert document["schema_version"] == "1.0"
        assert len(document["points"]) == 1
        margins = pd.read_csv(out_dir / "margins.csv")
        assert len(margins) == 300

    def test_epsilon_sweep_csv(
        self, out_dir: Path, capsys: pytest.CaptureFixture
    ) -> None:
        """Test that --format csv prints the sweep table."""
        code = cli(
            out_dir,
            "--format",
            "csv",
            "audit",
            "--synthetic",
            "--n",
            "300",
            "--sensitivity",
            "0.05",
            "--epsilon-grid",
            "1",
            "10",
        )
        assert code == EXIT_OK
        header = capsys.readouterr().out.splitlines()[0]
        assert header.startswith("epsilon,delta,sigma,metric,group,zeta")
        points = read_json(out_dir / "audit.json")["points"]
        assert [p["noise"]["epsilon"] for p in points] == [1.0, 10.0]

    def test_no_data(self, out_dir: Path) -> None:
        """Test that an audit without a data source is a usage error."""
        assert cli(out_dir, "audit", "--sigma", "0.1") == EXIT_USAGE

    def test_csv_needs_schema(self, out_dir: Path, csv_file: Path) -> None:
        """Test that CSV input requires the column roles."""
        code = cli(
            out_dir,
            "audit",
            "--data",
            str(csv_file),
            "--sensitive-column",
            "sex",
            "--sigma",
            "0.1",
        )
        assert code == EXIT_USAGE

    def test_both_noise_sources(self, out_dir: Path) -> None:
        """Test that sigma and a budget together are a usage error."""
        code = cli(
            out_dir,
            "audit",
            "--synthetic",
            "--sigma",
            "0.1",
            "--sensitivity",
            "0.1",
        )
        assert code == EXIT_USAGE

    def test_ingestion_failure(self, out_dir: Path, temp_dir: Path) -> None:
        """Test that an unreadable CSV exits with 1."""
        path = temp_dir / "broken.csv"
        path.write_text("x,s,y\n1,a,1\nfoo,b,0\n")
        code = cli(
            out_dir,
            "audit",
            "--data",
            str(path),
            "--sensitive-column",
            "s",
            "--label-column",
            "y",
            "--positive-label",
            "1",
            "--sigma",
            "0.1",
        )
        assert code == EXIT_FAILURE
        assert not (out_dir / "audit.json").exists()


@pytest.mark.integration
class TestSimulateCommand:
    """Test cases for the simulate command."""

    def test_too_few_models(self, out_dir: Path) -> None:
        """Test that fewer than 100 models are refused."""
        code = cli(
            out_dir,
            "simulate",
            "--synthetic",
            "--sigma",
            "0.3",
            "--models",
            "50",
        )
        assert code == EXIT_USAGE

    def test_coverage_run(self, out_dir: Path) -> None:
        """Test a passing coverage run and its outputs."""
        code = cli(
            out_dir,
            "simulate",
            "--synthetic",
            "--n",
            "300",
            "--sigma",
            "0.3",
            "--zeta",
            "0.1",
            "--models",
            "200",
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "coverage.json")
        assert document["m"] == 200
        assert document["base_seed"] == 3
        assert all(r["passed"] for r in document["coverage"])
        lower, upper = document["quantile_bands"]["norm"]
        assert 0.0 <= lower <= upper
        samples = pd.read_csv(out_dir / "samples.csv")
        assert len(samples) == 200
        assert "accuracy[all]" in samples.columns

    def test_coverage_failure(self, out_dir: Path) -> None:
        """Test that a failed coverage check exits with 1."""
        failed = CoverageResult(
            metric="norm_upper",
            zeta=0.1,
            nominal=0.9,
            coverage=0.5,
            standard_error=0.03,
            threshold=0.85,
            passed=False,
            m=200,
        )
        with patch(
            "dp_audit.auditor.coverage_check", return_value=[failed]
        ):
            code = cli(
                out_dir,
                "simulate",
                "--synthetic",
                "--n",
                "200",
                "--sigma",
                "0.3",
                "--zeta",
                "0.1",
                "--models",
                "100",
            )
        assert code == EXIT_FAILURE
        assert (out_dir / "coverage.json").exists()


@pytest.mark.integration
class TestDataCommands:
    """Test cases for gen-data, train, split and posterior."""

    def test_pipeline(self, out_dir: Path) -> None:
        """Test generating, training on and inverting a dataset."""
        assert cli(out_dir, "gen-data", "--n", "200", "--p", "2") == EXIT_OK
        summary = read_json(out_dir / "dataset_summary.json")
        assert summary["summary"]["n"] == 200
        assert summary["summary"]["p"] == 3

        data_args = [
            "--data",
            str(out_dir / "synthetic.csv"),
            "--sensitive-column",
            "group",
            "--label-column",
            "label",
            "--positive-label",
            "1",
        ]
        assert cli(out_dir, "train", *data_args) == EXIT_OK
        weights = read_json(out_dir / "model.json")["weights"]
        assert len(weights) == 3
        assert read_json(out_dir / "training.json")["iterations"] >= 1

        code = cli(
            out_dir,
            "posterior",
            "--private-model",
            str(out_dir / "model.json"),
            "--sigma",
            "0.5",
            *data_args,
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "posterior.json")
        assert document["uniform_prior"] is True
        assert document["posterior"]["mean"] == pytest.approx(weights)
        assert document["bounds"]["noise"]["sigma"] == 0.5

    def test_posterior_with_prior(self, out_dir: Path, temp_dir: Path) -> None:
        """Test the shrinkage posterior without a dataset."""
        path = temp_dir / "private.json"
        path.write_text(json.dumps({"weights": [2.0, 2.0]}))
        code = cli(
            out_dir,
            "posterior",
            "--private-model",
            str(path),
            "--sigma",
            "1",
            "--prior-scale",
            "1",
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "posterior.json")
        assert document["posterior"]["mean"] == pytest.approx([1.0, 1.0])
        assert document["bounds"] is None

    def test_split(self, out_dir: Path) -> None:
        """Test that split writes complementary CSV files."""
        code = cli(
            out_dir,
            "split",
            "--synthetic",
            "--n",
            "100",
            "--train-fraction",
            "0.7",
        )
        assert code == EXIT_OK
        assert len(pd.read_csv(out_dir / "train.csv")) == 70
        assert len(pd.read_csv(out_dir / "test.csv")) == 30
        assert read_json(out_dir / "split.json")["seed"] == 3


@pytest.mark.integration
class TestNoisyGdCommand:
    """Test cases for the noisy-gd command."""

    def test_diagonal_hessian(self, out_dir: Path) -> None:
        """Test the analysis document for a diagonal Hessian."""
        code = cli(
            out_dir,
            "noisy-gd",
            "--hessian-diag",
            "1",
            "2",
            "--eta",
            "0.05",
            "--sigma",
            "0.5",
            "--steps",
            "20000",
            "--burn-in",
            "1000",
        )
        assert code == EXIT_OK
        document = read_json(out_dir / "noisy_gd.json")
        assert document["empirical"]["samples"] == 19_000
        assert document["stationary"]["mean"] == [0.0, 0.0]

    def test_unstable(self, out_dir: Path) -> None:
        """Test that an unstable learning rate is a usage error."""
        code = cli(
            out_dir,
            "noisy-gd",
            "--hessian-diag",
            "4",
            "--eta",
            "1",
            "--sigma",
            "0.5",
            "--steps",
            "100",
            "--burn-in",
            "10",
        )
        assert code == EXIT_USAGE
