import pytest
from hypothesis import HealthCheck, settings

from betatakagi.beta_dynamics import BetaParam
from betatakagi.invariant_measure import build_density

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def b2():
    return BetaParam.parse("2", 1024)


@pytest.fixture(scope="session")
def golden():
    return BetaParam.parse("golden", 1024)


@pytest.fixture(scope="session")
def d2(b2):
    return build_density(b2)


@pytest.fixture(scope="session")
def dgolden(golden):
    return build_density(golden)
