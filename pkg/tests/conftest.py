import pytest

# criterion number -> (title, list of per-test outcomes)
_acceptance: dict[str, tuple[str, list[bool]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _acceptance.setdefault(number, (title, []))[1].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance, key=int):
        title, results = _acceptance[number]
        verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title}")
