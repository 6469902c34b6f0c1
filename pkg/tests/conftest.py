"""Collects one pass/fail line per acceptance criterion for the summary."""

import time

import pytest

ACCEPTANCE: dict = {}


class Criterion:
    def __init__(self, number: int, title: str, budget_s: float):
        self.number, self.title, self.budget = number, title, budget_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        ACCEPTANCE[self.number] = (self.title, False, None)
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and elapsed < self.budget
        ACCEPTANCE[self.number] = (self.title, ok, elapsed)
        line = f"criterion {self.number}: {'PASS' if ok else 'FAIL'} {self.title} ({elapsed:.2f} s, budget {self.budget:g} s)"
        print(line)
        if exc_type is None and not ok:
            raise AssertionError(f"runtime {elapsed:.1f} s exceeds budget {self.budget:g} s")
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, elapsed = ACCEPTANCE[n]
        t = "not finished" if elapsed is None else f"{elapsed:.2f} s"
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} ({t})")
