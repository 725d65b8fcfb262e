import numpy as np
import pytest

from multihilbert import discretize as dz
from multihilbert.geometry import validate_configuration

CONFIGS = {
    "disjoint": ([[0, 1]], [[2, 3]]),
    "touch1": ([[-1, 0]], [[0, 1]]),
    "touch2": ([[1, 2], [3, 4]], [[2, 3]]),
    "mixed": ([[0, 1], [3, 4]], [[1, 2], [5, 6]]),
    "unbounded": ([[0, 1]], [[2, "inf"]]),
}


@pytest.fixture(scope="session")
def disjoint():
    return validate_configuration(*CONFIGS["disjoint"])


@pytest.fixture(scope="session")
def touching():
    return validate_configuration(*CONFIGS["touch1"])


@pytest.fixture(scope="session")
def disjoint_system(disjoint):
    grid = dz.build_grid(disjoint, panels=16)
    return disjoint, grid, dz.assemble_K(disjoint, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
