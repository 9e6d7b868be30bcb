"""Pytest runtime configuration."""

from __future__ import annotations

import pytest
from loguru import logger

from wavelet_runs.base import InvalidInputError
from wavelet_runs.wavelet import SYM3


def pytest_addoption(parser: pytest.Parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )
    parser.addoption(
        "--onlyslow", action="store_true", default=False, help="only run slow tests"
    )


def pytest_configure(config: pytest.Config):
    config.addinivalue_line(
        "markers", "slow: mark test as a benchmark-scale run to not run by default"
    )


def pytest_sessionstart(session: pytest.Session):
    # every numeric expectation below assumes the published sym3 taps
    try:
        SYM3.check()
    except InvalidInputError as e:  # pragma: no cover
        pytest.exit(f"sym3 filter bank failed verification: {e}", returncode=1)


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]):
    if config.getoption("--runslow"):
        # --runslow given in cli: do not skip slow tests
        return

    if config.getoption("--onlyslow"):
        for item in items.copy():
            if "slow" not in item.keywords:
                items.remove(item)
        return

    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def warnings_log():
    """Messages logged at WARNING or above while the test runs."""
    messages: list[str] = []
    logger.enable("wavelet_runs")
    handler_id = logger.add(
        lambda m: messages.append(m.record["message"]), level="WARNING"
    )
    yield messages
    logger.remove(handler_id)
    logger.disable("wavelet_runs")


@pytest.fixture(autouse=True)
def _reset_logging():
    # main() installs a stderr sink bound to the capture stream of one test
    yield
    logger.remove()
    logger.disable("wavelet_runs")
