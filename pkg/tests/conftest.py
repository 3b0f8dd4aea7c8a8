import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, list[str]] = {}
_details: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _results.setdefault(n, []).append("SKIP" if report.skipped else report.outcome.upper())
    for name, text in report.user_properties if report.when == "call" else ():
        if name == "detail":
            _details[n] = f"{_details[n]}; {text}" if n in _details else text


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        outcomes = _results[n]
        if "FAILED" in outcomes:
            status = "FAIL"
        elif all(o == "SKIP" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        line = f"criterion {n:2d}: {status}"
        if n in _details:
            line += f"  ({_details[n]})"
        terminalreporter.write_line(line)


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement to the acceptance report."""
    def put(text: str):
        record_property("detail", text)
        print(text)
    return put
