import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Append ``(criterion, passed, detail)``; printed in the terminal summary."""

    def record(name, passed, detail):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
