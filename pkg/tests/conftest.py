"""Suite-wide fixtures and the acceptance report summary."""

from __future__ import annotations

import pytest

# (criterion, passed, detail) tuples collected by the acceptance tests.
_ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance():
    """Recorder for one acceptance criterion's verdict line."""

    def record(name, ok, detail=""):
        _ACCEPTANCE_RESULTS.append((name, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{suffix}")
