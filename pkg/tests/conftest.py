"""
Shared pytest fixtures for the audit toolkit tests.

This module provides reusable fixtures that can be used across all test modules
to reduce code duplication and improve test maintainability.
"""

import tempfile
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from dp_audit.auditor import FairnessAuditor
from dp_audit.core.config import Settings
from dp_audit.core.numerics import SpdMatrix
from dp_audit.ingestion.synthetic import SyntheticSpec, generate_synthetic
from dp_audit.ingestion.trainer import train_logistic
from dp_audit.models.dataset import LabeledDataset
from dp_audit.models.linear import LinearModel
from dp_audit.privacy.mechanism import NoiseSpec


@pytest.fixture
def temp_dir() -> Any:
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def settings(temp_dir: Path) -> Settings:
    """Create a Settings instance writing into a temporary directory."""
    return Settings(OUTPUT_DIRECTORY=temp_dir / "out")


@pytest.fixture
def auditor(settings: Settings) -> FairnessAuditor:
    """Create a FairnessAuditor instance for testing."""
    return FairnessAuditor(settings=settings)


@pytest.fixture
def toy_dataset() -> LabeledDataset:
    """Four examples in two groups; the last column is the bias."""
    return LabeledDataset(
        features=np.array(
            [
                [2.0, 1.0],
                [1.0, 1.0],
                [-1.0, 1.0],
                [-3.0, 1.0],
            ]
        ),
        sensitive=np.array(["a", "a", "b", "b"]),
        labels=np.array([1, -1, -1, 1]),
    )


@pytest.fixture
def synthetic_spec() -> SyntheticSpec:
    """A small two-group population with an 80/20 split."""
    return SyntheticSpec.two_groups(
        p=3, n=400, proportions=(0.8, 0.2), separation=1.0, seed=7
    )


@pytest.fixture
def synthetic_dataset(synthetic_spec: SyntheticSpec) -> LabeledDataset:
    """Dataset drawn from the synthetic population."""
    return generate_synthetic(synthetic_spec)


@pytest.fixture
def trained_model(synthetic_dataset: LabeledDataset) -> LinearModel:
    """Logistic model trained on the synthetic dataset."""
    return train_logistic(synthetic_dataset, l2_strength=0.1).model


@pytest.fixture
def isotropic_noise(trained_model: LinearModel) -> NoiseSpec:
    """Isotropic noise with a moderate scale."""
    return NoiseSpec.isotropic(0.3, trained_model.dim)


@pytest.fixture
def correlated_covariance() -> SpdMatrix:
    """A non-diagonal 4x4 SPD matrix."""
    return SpdMatrix.from_array(
        [
            [2.0, 0.5, 0.0, 0.1],
            [0.5, 1.0, 0.2, 0.0],
            [0.0, 0.2, 1.5, 0.3],
            [0.1, 0.0, 0.3, 0.8],
        ]
    )


@pytest.fixture
def blank_env_file(temp_dir: Any) -> Any:
    """Create a blank .env file for isolated environment testing."""
    env_path = temp_dir / "blank.env"
    env_path.write_text("")
    return env_path


@pytest.fixture
def test_env_file(temp_dir: Any) -> Any:
    """Create a test .env file with various settings."""
    env_content = f"""
    APP_NAME=TestAudit
    LOG_LEVEL=DEBUG
    SEED=42
    KAPPA=0.1
    MC_MODELS=500
    OUTPUT_DIRECTORY={temp_dir / "env_out"}
    ZETA_LEVELS=[0.02, 0.2]
    """.strip()

    env_path = temp_dir / "test.env"
    env_path.write_text(env_content)
    return env_path


@pytest.fixture
def csv_file(temp_dir: Path) -> Path:
    """A three-row CSV with a categorical feature."""
    path = temp_dir / "people.csv"
    path.write_text(
        "age,hours,job,sex,income\n"
        "39,40,clerk,F,<=50K\n"
        "50,13,manager,M,>50K\n"
        "38,40,clerk,M,<=50K\n"
    )
    return path
