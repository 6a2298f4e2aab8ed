"""
Configuration management for the audit toolkit.

This module provides centralized configuration using Pydantic settings
with environment variable support and validation.
"""

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Annotated


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_file=".env", populate_by_name=True, frozen=True
    )

    # Application settings
    app_name: Annotated[str, Field(alias="APP_NAME")] = "DP Fairness Audit"
    app_version: Annotated[str, Field(alias="APP_VERSION")] = "1.0.0"
    debug: Annotated[bool, Field(alias="DEBUG")] = False
    schema_version: Annotated[str, Field(alias="SCHEMA_VERSION")] = "1.0"

    # Output settings
    output_directory: Annotated[Path, Field(alias="OUTPUT_DIRECTORY")] = Path(
        "audit_output"
    )

    # Reproducibility
    seed: Annotated[int, Field(alias="SEED")] = 0

    # Bound settings
    zeta_levels: Annotated[list[float], Field(alias="ZETA_LEVELS")] = [
        0.01,
        0.05,
        0.1,
    ]
    epsilon_grid: Annotated[list[float], Field(alias="EPSILON_GRID")] = [
        0.1,
        0.5,
        1.0,
        5.0,
        10.0,
        50.0,
    ]
    kappa: Annotated[float, Field(alias="KAPPA", gt=0.0, lt=1.0)] = 0.05
    b3: Annotated[float, Field(alias="B3", gt=0.0)] = 1.0
    b4: Annotated[float, Field(alias="B4", gt=0.0)] = 1.0

    # Calibration settings
    calibration_rtol: Annotated[
        float, Field(alias="CALIBRATION_RTOL", gt=0.0)
    ] = 1e-11
    calibration_max_doublings: Annotated[
        int, Field(alias="CALIBRATION_MAX_DOUBLINGS", ge=1)
    ] = 200
    monotonicity_grid_points: Annotated[
        int, Field(alias="MONOTONICITY_GRID_POINTS", ge=2)
    ] = 100

    # Monte Carlo settings
    mc_models: Annotated[int, Field(alias="MC_MODELS", ge=1)] = 10_000
    n_jobs: Annotated[int, Field(alias="N_JOBS")] = 1

    # Training settings
    train_fraction: Annotated[float, Field(alias="TRAIN_FRACTION")] = 0.8
    l2_strength: Annotated[float, Field(alias="L2_STRENGTH", ge=0.0)] = 1.0
    learning_rate: Annotated[float, Field(alias="LEARNING_RATE", gt=0.0)] = (
        1.0
    )
    train_iterations: Annotated[int, Field(alias="TRAIN_ITERATIONS", ge=1)] = (
        500
    )

    # Logging settings
    log_level: Annotated[str, Field(alias="LOG_LEVEL")] = "INFO"
    log_format: Annotated[str, Field(alias="LOG_FORMAT")] = "text"

    @field_validator("output_directory")
    def create_output_directory(cls, v: str | Path) -> Path:
        """Ensure output directory exists."""
        path = Path(v)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @field_validator("zeta_levels")
    def validate_zeta_levels(cls, v: list[float]) -> list[float]:
        """Every confidence parameter must lie strictly inside (0, 1)."""
        if not v:
            raise ValueError("At least one zeta level is required")
        for zeta in v:
            if not 0.0 < zeta < 1.0:
                raise ValueError(f"Zeta must lie in (0, 1), got {zeta}")
        return v

    @field_validator("epsilon_grid")
    def validate_epsilon_grid(cls, v: list[float]) -> list[float]:
        """Validate the privacy sweep grid."""
        if not v:
            raise ValueError("Epsilon grid must not be empty")
        if any(eps < 0.0 for eps in v):
            raise ValueError("Epsilon values must be nonnegative")
        return v

    @field_validator("train_fraction")
    def validate_train_fraction(cls, v: float) -> float:
        """Validate train fraction."""
        if not 0.0 < v < 1.0:
            raise ValueError("Train fraction must lie in (0, 1)")
        return v

    @field_validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return v.upper()

    @field_validator("log_format")
    def validate_log_format(cls, v: str) -> str:
        """Validate log format."""
        if v.lower() not in ("json", "text"):
            raise ValueError("Log format must be 'json' or 'text'")
        return v.lower()
