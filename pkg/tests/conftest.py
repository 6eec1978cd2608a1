import pytest

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary."""
    def record(number: int, title: str):
        _ACCEPTANCE[number] = (title, "pending")
        request.node._criterion = number
    yield record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    number = getattr(item, "_criterion", None)
    if number is None:
        return
    title = _ACCEPTANCE[number][0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
        _ACCEPTANCE[number] = (title, status)
    elif report.skipped and _ACCEPTANCE[number][1] == "pending":
        _ACCEPTANCE[number] = (title, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status:<4} {title}")
