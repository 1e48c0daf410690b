import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from causet.grid import build_grid_model  # noqa: E402
from causet.spacetime import builtin  # noqa: E402


@functools.lru_cache(maxsize=None)
def cached_model(metric, n, **kw):
    return build_grid_model(builtin(metric), n, **kw)


@pytest.fixture(scope="session")
def model():
    """Factory for cached builtin models: ``model("torus", 16)``."""
    return cached_model


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(3, ok, "modulus 0.06 <= 0.22")``."""
    lines = request.config.stash[ACCEPTANCE]

    def emit(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
