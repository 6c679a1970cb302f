"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and report.passed:
        return
    k, title = marker.args
    entry = _OUTCOMES.setdefault(k, {"title": title, "passed": True, "details": []})
    if report.failed:
        entry["passed"] = False
    if report.when == "call":
        entry["details"].extend(f"{key}={value}" for key, value in report.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        entry = _OUTCOMES[k]
        status = "PASS" if entry["passed"] else "FAIL"
        details = ", ".join(entry["details"])
        line = f"{status} criterion {k}: {entry['title']}"
        terminalreporter.write_line(f"{line} [{details}]" if details else line)
