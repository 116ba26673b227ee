import numpy as np
import pytest

from ctmbdm.ctm import build_distribution, bundled_table, ctm_table
from ctmbdm.turing import RuleSpace


@pytest.fixture(scope="session")
def d22_dist():
    return build_distribution(RuleSpace(2, 2))


@pytest.fixture(scope="session")
def d22(d22_dist):
    return ctm_table(d22_dist, 4)


@pytest.fixture(scope="session")
def d32_dist():
    return build_distribution(RuleSpace(3, 2))


@pytest.fixture(scope="session")
def d32(d32_dist):
    return ctm_table(d32_dist, 7)


@pytest.fixture(scope="session")
def d42s():
    return bundled_table("d42s")


@pytest.fixture(scope="session")
def d2d():
    """Sampled (4,2) turmite table, exhaustive over shapes up to 4x4."""
    return bundled_table("d42_2d")


@pytest.fixture
def rng():
    return np.random.default_rng(20170331)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = next((m for name, m in list(sys.modules.items())
                   if name.split(".")[-1] == "test_acceptance"), None)
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
