import re
from collections import OrderedDict

_ACCEPTANCE = OrderedDict()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    per_criterion = OrderedDict()
    for name, outcome in _ACCEPTANCE.items():
        m = re.match(r"test_c(\d+)([a-z]?)_(.*)", name)
        if not m:
            continue
        number, part, label = int(m.group(1)), m.group(2), m.group(3).replace("_", " ")
        tr.write_line(f"{outcome}  criterion {number}{part}: {label}")
        per_criterion.setdefault(number, []).append(outcome)
    tr.write_line("")
    for number, outcomes in per_criterion.items():
        verdict = "PASS" if all(o == "PASS" for o in outcomes) else "FAIL"
        tr.write_line(f"criterion {number:>2}: {verdict}")
