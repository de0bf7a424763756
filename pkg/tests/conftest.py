"""Shared test fixtures for hapticsim tests."""

from __future__ import annotations

from collections.abc import Generator
from pathlib import Path
from typing import Any

import pytest

from hapticsim import (
    RatingTable,
    SessionTrace,
    configure_logging,
    flush_logging,
    load_rating_table,
    load_scenario,
    run_scenario,
)


@pytest.fixture(scope="session", autouse=True)
def quiet_logging() -> Generator[None, None, None]:
    """Keep library logs off stderr unless a test installs its own sink."""
    configure_logging("ERROR")
    yield
    flush_logging()


@pytest.fixture(scope="session")
def rating_table() -> RatingTable:
    """The bundled rating table."""
    return load_rating_table()


@pytest.fixture(scope="session")
def scenario_traces() -> dict[str, SessionTrace]:
    """Bundled scenarios, each run once per session with its own seed."""
    names = ("ceramic-as-glass", "glass-as-ceramic", "paper-as-wood", "no-stimulus")
    return {name: run_scenario(load_scenario(name)) for name in names}


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Fresh output directory for CLI runs."""
    return tmp_path / "out"


class CapturingLogger:
    """Stand-in for a component logger that records ``log`` calls."""

    def __init__(self) -> None:
        self.records: list[tuple[str, str, dict[str, Any]]] = []

    def log(self, level: str, message: str, **kwargs: Any) -> None:
        self.records.append((level, message, dict(kwargs)))

    def debug(self, message: str, **kwargs: Any) -> None:
        self.records.append(("DEBUG", message, dict(kwargs)))

    def info(self, message: str, **kwargs: Any) -> None:
        self.records.append(("INFO", message, dict(kwargs)))

    def warning(self, message: str, **kwargs: Any) -> None:
        self.records.append(("WARNING", message, dict(kwargs)))


@pytest.fixture
def capturing_logger() -> CapturingLogger:
    return CapturingLogger()
