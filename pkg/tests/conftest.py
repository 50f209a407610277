import re

import pytest

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Tag an acceptance test with its criterion number and title."""

    def tag(number, title):
        request.node.user_properties.append(("criterion", (number, title)))

    return tag


def pytest_runtest_logreport(report):
    # acceptance tests are named test_cNN_*; the tag only adds a readable title
    match = re.search(r"::test_c(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    number = int(match.group(1))
    title = dict(report.user_properties).get("criterion", (number, match.group(2)))[1]
    prev_title, ok = _CRITERIA.get(number, (title, True))
    if report.when == "call" or report.failed:
        ok = ok and report.passed
    _CRITERIA[number] = (title if report.user_properties else prev_title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
