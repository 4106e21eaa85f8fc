import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(label: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
