import re

_LINES = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    for key, value in report.user_properties:
        if key == "criterion":
            _LINES[n] = value
            return
    _LINES[n] = ("PASS" if report.passed else "FAIL", "no summary recorded")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        status, detail = _LINES[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
