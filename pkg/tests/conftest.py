import pytest
from hypothesis import HealthCheck, settings

from singular_dde.model import ModelParams

settings.register_profile(
    "repo", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


def record(line: str) -> None:
    """Queue a line for the acceptance summary printed at the end of the run."""
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def P():
    """ModelParams from the delay ratio with a1 = c = 1, K2 = 0.5 defaults."""
    return ModelParams.from_ratio
