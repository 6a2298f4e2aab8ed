"""
Tests for structured logging.
"""

import json

import pytest
import structlog

from dp_audit.core.errors import IngestionError, NotSpdError
from dp_audit.core.logging import (
    bind_run_context,
    error_context,
    get_logger,
    log_error,
    setup_logging,
    timed,
)


@pytest.fixture(autouse=True)
def clear_context() -> None:
    """Start every test without bound run context."""
    structlog.contextvars.clear_contextvars()


def json_lines(err: str) -> list[dict]:
    return [json.loads(line) for line in err.splitlines() if line.strip()]


class TestSetupLogging:
    """Test cases for setup_logging."""

    def test_requires_arguments(self) -> None:
        """Test that level and format are mandatory."""
        with pytest.raises(ValueError):
            setup_logging(log_level="", log_format="json")

    def test_rejects_unknown_format(self) -> None:
        """Test that only json and text renderers exist."""
        with pytest.raises(ValueError, match="log_format"):
            setup_logging(log_level="INFO", log_format="xml")

    def test_json_lines_on_stderr(self, capsys: pytest.CaptureFixture) -> None:
        """Test that records are JSON on stderr and stdout stays empty."""
        setup_logging(log_level="INFO", log_format="json")
        get_logger("tests.logging").info("Calibrated noise", sigma=0.5)
        captured = capsys.readouterr()
        assert captured.out == ""
        record = json_lines(captured.err)[-1]
        assert record["event"] == "Calibrated noise"
        assert record["sigma"] == 0.5
        assert record["level"] == "info"

    def test_level_filters(self, capsys: pytest.CaptureFixture) -> None:
        """Test that records below the configured level are dropped."""
        setup_logging(log_level="WARNING", log_format="json")
        get_logger("tests.logging").info("hidden")
        assert capsys.readouterr().err == ""


class TestRunContext:
    """Test cases for bind_run_context and timed."""

    def test_context_on_every_line(
        self, capsys: pytest.CaptureFixture
    ) -> None:
        """Test that command and seed are attached to each record."""
        setup_logging(log_level="INFO", log_format="json")
        bind_run_context("simulate", 42, models=200)
        logger = get_logger("tests.logging")
        logger.info("first")
        logger.info("second")
        records = json_lines(capsys.readouterr().err)[-2:]
        for record in records:
            assert record["command"] == "simulate"
            assert record["seed"] == 42
            assert record["models"] == 200

    def test_rebinding_replaces(self, capsys: pytest.CaptureFixture) -> None:
        """Test that a new run context does not keep the old fields."""
        setup_logging(log_level="INFO", log_format="json")
        bind_run_context("simulate", 1, models=200)
        bind_run_context("audit", 2)
        get_logger("tests.logging").info("event")
        record = json_lines(capsys.readouterr().err)[-1]
        assert record["command"] == "audit"
        assert "models" not in record

    def test_timed(self, capsys: pytest.CaptureFixture) -> None:
        """Test that a timed block logs its duration and fields."""
        setup_logging(log_level="INFO", log_format="json")
        with timed(get_logger("tests.logging"), "sweep", levels=3):
            pass
        record = json_lines(capsys.readouterr().err)[-1]
        assert record["operation"] == "sweep"
        assert record["levels"] == 3
        assert record["elapsed_seconds"] >= 0.0


class TestErrorContext:
    """Test cases for structured error fields."""

    def test_ingestion_location(self) -> None:
        """Test that row and column of a bad cell are kept."""
        error = IngestionError("non-numeric value", row=7, column="hours")
        context = error_context(error)
        assert context["error_type"] == "IngestionError"
        assert context["row"] == 7
        assert context["column"] == "hours"

    def test_spd_condition(self) -> None:
        """Test that the failed SPD condition is reported."""
        context = error_context(NotSpdError("asymmetric", "|A - A^T| = 1"))
        assert context["condition"] == "asymmetric"

    def test_plain_error(self) -> None:
        """Test that other errors carry only type and message."""
        assert error_context(ValueError("bad")) == {
            "error_type": "ValueError",
            "error_message": "bad",
        }

    def test_log_error(self, capsys: pytest.CaptureFixture) -> None:
        """Test that log_error merges extra context."""
        setup_logging(log_level="INFO", log_format="json")
        log_error(
            get_logger("tests.logging"),
            IngestionError("missing value", row=2),
            {"path": "data.csv"},
        )
        record = json_lines(capsys.readouterr().err)[-1]
        assert record["level"] == "error"
        assert record["row"] == 2
        assert record["path"] == "data.csv"
        assert "column" not in record
