import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""

    def record(number: int, summary: str) -> None:
        _ACCEPTANCE[number] = summary

    yield record
    rep = getattr(request.node, "rep_call", None)
    for number, summary in list(_ACCEPTANCE.items()):
        if not summary.startswith(("PASS", "FAIL")):
            status = "PASS" if rep is not None and rep.passed else "FAIL"
            _ACCEPTANCE[number] = f"{status}  {summary}"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {_ACCEPTANCE[number]}")
