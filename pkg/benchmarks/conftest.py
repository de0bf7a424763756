"""Benchmark fixtures."""

from __future__ import annotations

from collections.abc import Generator

import pytest

from hapticsim import configure_logging


@pytest.fixture(autouse=True)
def quiet_logging() -> Generator[None, None, None]:
    """Keep debug logging out of the timed loops."""
    configure_logging("ERROR")
    yield
    configure_logging("WARNING")
