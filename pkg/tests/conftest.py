"""Shared fixtures plus the acceptance-criteria summary hook."""

import numpy as np
import pytest

from dualrail.chain_core import ChainSpec, build_sector_hamiltonian, diagonalize

# one line per acceptance criterion, printed after the test run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:2d} [{status}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dec_cache():
    """Memoized isotropic-chain eigensystems keyed by N."""
    cache = {}

    def get(n: int):
        if n not in cache:
            cache[n] = diagonalize(build_sector_hamiltonian(ChainSpec(n)))
        return cache[n]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(7)
