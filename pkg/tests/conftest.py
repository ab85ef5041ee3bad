import pytest
from hypothesis import HealthCheck, settings

from aef.expr import set_seed

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _fixed_zero_test_seed():
    # every test starts from the same sampling stream
    set_seed(12345)
    yield


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
