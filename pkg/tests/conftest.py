import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def acceptance_log():
    """Record one line per acceptance criterion for the terminal summary."""

    def record(criterion: str, passed: bool | None, detail: str = "") -> None:
        status = {True: "PASS", False: "FAIL", None: "BLOCKED"}[passed]
        _ACCEPTANCE.append((criterion, status, detail))
        print(f"[{status}] {criterion} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status:8s} {criterion}  {detail}")
