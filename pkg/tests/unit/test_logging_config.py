"""Tests for logging setup and the structured formatter."""

import json
import logging
from pathlib import Path

import pytest

from rolegrad.lib.logging_config import (
    HEAVY_DEBUG,
    StructuredFormatter,
    get_logger,
    resolve_level,
    setup_logging,
)


@pytest.mark.ai_generated
class TestResolveLevel:
    def test_explicit_level(self) -> None:
        assert resolve_level("debug") == logging.DEBUG
        assert resolve_level("heavy-debug") == HEAVY_DEBUG == 5

    def test_environment_fallback(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("ROLEGRAD_LOG", "warning")
        assert resolve_level(None) == logging.WARNING

    def test_explicit_beats_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("ROLEGRAD_LOG", "warning")
        assert resolve_level("error") == logging.ERROR

    def test_default_and_unknown_are_info(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("ROLEGRAD_LOG", raising=False)
        assert resolve_level(None) == logging.INFO
        assert resolve_level("chatty") == logging.INFO


@pytest.mark.ai_generated
def test_structured_formatter_merges_fields() -> None:
    """Per-epoch records carry their numbers as top-level JSON keys."""
    record = logging.LogRecord(
        "rolegrad.trainer", logging.INFO, "trainer.py", 10, "epoch done", None, None
    )
    record.fields = {"epoch": 3, "L_U": 0.25}
    data = json.loads(StructuredFormatter().format(record))
    assert data["message"] == "epoch done"
    assert data["level"] == "INFO"
    assert data["logger"] == "rolegrad.trainer"
    assert data["epoch"] == 3
    assert data["L_U"] == 0.25
    assert data["timestamp"].endswith("Z")


@pytest.mark.ai_generated
def test_get_logger_prefixes_package() -> None:
    assert get_logger("services.crf").name == "rolegrad.services.crf"
    assert get_logger("rolegrad.cli").name == "rolegrad.cli"


@pytest.mark.ai_generated
def test_quiet_logging_only_writes_file(tmp_path: Path) -> None:
    log_file = tmp_path / "logs" / "run.log"
    logger = setup_logging("info", json_format=True, log_file=log_file, quiet=True)
    assert len(logger.handlers) == 1
    get_logger("test").info("hello")
    for handler in logger.handlers:
        handler.close()
    assert json.loads(log_file.read_text().splitlines()[0])["message"] == "hello"
