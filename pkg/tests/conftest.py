import sys
from pathlib import Path

import pytest

# the oracle and problem helpers live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or report.outcome != "passed":
        _acceptance[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, outcome, duration = _acceptance[number]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {number:>2}. {title}  ({duration:.2f} s)")
    passed = sum(o == "passed" for _, o, _ in _acceptance.values())
    terminalreporter.write_line(f"{passed}/{len(_acceptance)} acceptance criteria passed")
