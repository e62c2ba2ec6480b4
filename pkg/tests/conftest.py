import os
import re

from hypothesis import settings

settings.register_profile("ci", deadline=None, derandomize=True, max_examples=40)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(\[.*\])?$")
_results: dict[int, tuple[str, bool]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None or (report.when != "call" and report.passed):
        return
    k = int(m.group(1))
    name, ok = _results.get(k, (m.group(2).replace("_", " "), True))
    _results[k] = (name, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        name, ok = _results[k]
        terminalreporter.write_line(f"criterion {k} ({name}): {'PASS' if ok else 'FAIL'}")
