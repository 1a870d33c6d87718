import pytest

# filled by tests/test_acceptance.py, one line per criterion
ACCEPTANCE_LINES: list = []


@pytest.fixture(autouse=True)
def _no_backend_env(monkeypatch):
    monkeypatch.delenv("POSTHOC_LAB_BACKEND", raising=False)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
