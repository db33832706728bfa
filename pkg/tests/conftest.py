import numpy as np
import pytest

from fibermortar.mesh import box_mesh, make_beam_mesh, make_solid_mesh, straight_beam


def central_difference(fun, x, h=1e-6):
    """Jacobian of ``fun`` at ``x`` by central differences (columns = inputs)."""
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(fun(x))
    J = np.zeros((f0.size, x.size))
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp.flat[i] += h
        xm.flat[i] -= h
        J[:, i] = (np.atleast_1d(fun(xp)) - np.atleast_1d(fun(xm))).ravel() / (2 * h)
    return J


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_cube():
    nodes, elems = box_mesh(1, 1, 1)
    return make_solid_mesh(nodes, elems)


@pytest.fixture
def single_beam():
    pos, tan, el, L = straight_beam((0.2, 0.3, 0.25), (0.75, 0.6, 0.7), 1)
    return make_beam_mesh(pos, tan, el, L)


# verdict lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
