import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record one acceptance line; the summary prints them in criterion order."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        _VERDICTS[number] = (title, passed, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, passed, detail = _VERDICTS[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{number}] {title}: {detail}")
