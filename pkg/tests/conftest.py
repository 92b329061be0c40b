import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            status = "xfail"
        else:
            status = report.outcome
        _outcomes.setdefault(int(m.group(1)), []).append((report.nodeid.split("::")[-1], status))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        parts = _outcomes[num]
        ok = all(s == "passed" for _, s in parts)
        failed = [name for name, s in parts if s != "passed"]
        note = "" if ok else "  (not met: " + ", ".join(failed) + ")"
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}{note}")
