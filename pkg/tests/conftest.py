import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hsx.banach import Grid
from hsx.scenarios import default_grid
from hsx.state import EulerianState

settings.register_profile(
    "hsx",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("hsx")


@pytest.fixture(scope="session")
def grid512() -> Grid:
    return default_grid(512)


@pytest.fixture(scope="session")
def grid4096() -> Grid:
    return default_grid(4096)


@pytest.fixture(scope="session")
def breaking_state() -> EulerianState:
    return EulerianState.from_u([[0.0, 0.0], [1.0, -1.0]])


@st.composite
def resolved_states(draw, grid: Grid, max_segments: int = 4):
    """Piecewise-linear states whose breakpoints L maps exactly onto grid nodes.

    A segment of slope ``s`` occupying ``m`` cells in xi has x-length
    ``m h / (1 + s^2)``; atoms (at knots) have masses that are whole multiples
    of ``h``.
    """
    h = grid.h
    j = draw(st.integers(5, 40))
    x = float(grid.xi[j])
    u = draw(st.floats(-1.0, 1.0))
    knots = [(x, u)]
    atoms = []
    for _ in range(draw(st.integers(1, max_segments))):
        if draw(st.booleans()):
            atoms.append((x, draw(st.integers(1, 20)) * h))
        s = draw(st.floats(-1.5, 1.5))
        m = draw(st.integers(1, 50))
        dx = m * h / (1.0 + s * s)
        x, u = x + dx, u + s * dx
        knots.append((x, u))
    return EulerianState.from_u(np.array(knots), atoms=atoms)


@st.composite
def bars(draw, n: int):
    vals = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    return np.array(vals)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
