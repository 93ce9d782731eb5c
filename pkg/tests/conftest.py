from collections import defaultdict

import pytest

# criterion number -> [(check, passed, detail)]
_ACCEPTANCE = defaultdict(list)
_TITLES = {}


@pytest.fixture
def acceptance():
    def record(criterion, title, check, passed, detail=""):
        _TITLES[criterion] = title
        _ACCEPTANCE[criterion].append((check, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        checks = _ACCEPTANCE[n]
        ok = all(p for _, p, _ in checks)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {_TITLES[n]}")
        for check, passed, detail in checks:
            terminalreporter.write_line(f"    [{'pass' if passed else 'FAIL'}] {check}: {detail}")
