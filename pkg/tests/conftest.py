import functools

import numpy as np
import pytest

from hgauss.simulation import ExperimentConfig, run_experiment

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_experiment(config: ExperimentConfig):
    """Experiments are expensive; share identical configs across test modules."""
    return run_experiment(config)


@pytest.fixture(scope="session")
def experiment():
    return cached_experiment


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def report(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed

    return report


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
