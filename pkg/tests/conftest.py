import numpy as np
import pytest

CRITERIA: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is filled in by the report hook."""
    def record(number, text):
        CRITERIA[request.node.nodeid] = [number, text, "FAIL", ""]
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = CRITERIA.get(item.nodeid)
    if entry is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        entry[2] = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        if rep.outcome == "skipped" and isinstance(rep.longrepr, tuple):
            entry[3] = rep.longrepr[2]


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, status, note in sorted(CRITERIA.values(), key=lambda e: (e[0], e[1])):
        line = f"criterion {number:>2} {status}: {text}"
        terminalreporter.write_line(line + (f" ({note})" if note else ""))
