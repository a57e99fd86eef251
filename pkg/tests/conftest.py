import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE = []  # (criterion, passed, detail) in the order the checks ran


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
