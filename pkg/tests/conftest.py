import numpy as np
import pytest
from hypothesis import settings, strategies as st

from singint.geometry import REFERENCE_NODES, QuadraticTriangle, explicit_triangle, flat_triangle

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def exp_tri():
    return explicit_triangle(0.6, 0.7, 0.5)


@pytest.fixture
def flat():
    return flat_triangle()


def rotation(angles):
    a, b, c = angles
    Rz = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    Ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    Rx = np.array([[1, 0, 0], [0, np.cos(c), -np.sin(c)], [0, np.sin(c), np.cos(c)]])
    return Rz @ Ry @ Rx


@st.composite
def quadratic_triangles(draw, bump=0.15):
    """Mildly curved quadratic triangles: straight-edge nodes plus bounded perturbations."""
    pert = draw(st.lists(st.floats(-bump, bump), min_size=18, max_size=18))
    nodes = np.zeros((6, 3))
    nodes[:, :2] = REFERENCE_NODES
    nodes += np.array(pert).reshape(6, 3)
    return QuadraticTriangle(nodes)


interior_points = st.tuples(st.floats(0.05, 0.9), st.floats(0.05, 0.9)).filter(lambda p: p[0] + p[1] < 0.95)
