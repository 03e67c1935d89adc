import numpy as np
import pytest

from gammamix.ingest import MidpointSeries
from gammamix.synth import SynthConfig, simulate_market

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def azn_market():
    """The default 675-day AZN market used by the heavier tests."""
    cfg = SynthConfig()
    days = simulate_market(cfg)
    series = [MidpointSeries(d.date, d.log_prices) for d in days]
    return cfg, days, series


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
