import numpy as np
from hypothesis import strategies as st

from neumann_sharp.geometry import random_convex_polygon


@st.composite
def convex_polygons(draw, max_points: int = 24):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(4, max_points))
    return random_convex_polygon(np.random.default_rng(seed), n_points=n)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
