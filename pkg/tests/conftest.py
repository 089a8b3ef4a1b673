import itertools

import numpy as np
import pytest


def brute_force_allocations(total, n, exact):
    """Allocations by exhaustive product search (independent of the graph code)."""
    out = []
    for combo in itertools.product(range(total + 1), repeat=n):
        s = sum(combo)
        if (s == total) if exact else (s <= total):
            out.append(combo)
    return sorted(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record one PASS/FAIL line; also echoed live and in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
