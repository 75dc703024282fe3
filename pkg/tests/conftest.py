import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fockdom", deadline=None, derandomize=True, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fockdom"))

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Mutable record a criterion test fills with a one-line summary of what it measured."""
    return {"detail": ""}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        rec = item.funcargs.get("criterion") or {}
        detail = rec.get("detail", "")
        if rep.failed and not detail:
            detail = "error: " + str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"
        _ACCEPTANCE[mark.args[0]] = (rep.passed, mark.args[1], detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        ok, title, detail = _ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}")
