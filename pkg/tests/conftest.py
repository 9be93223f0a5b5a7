import time
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def corpus_root():
    return ROOT / "corpus"


@pytest.fixture
def criterion(request, capsys):
    """Time a block and print one PASS/FAIL line for it, even under output capture."""

    class Criterion:
        def __init__(self):
            self.start = time.perf_counter()
            self.detail = ""

        def elapsed(self):
            return time.perf_counter() - self.start

    c = Criterion()
    yield c
    report = request.node.rep_call if hasattr(request.node, "rep_call") else None
    ok = report is not None and report.passed
    with capsys.disabled():
        mark = request.node.get_closest_marker("criterion")
        number, title = mark.args
        extra = f"; {c.detail}" if c.detail else ""
        print(f"\ncriterion {number} ({title}): {'PASS' if ok else 'FAIL'} [{c.elapsed():.1f}s{extra}]")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
