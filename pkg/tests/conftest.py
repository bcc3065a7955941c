import numpy as np
import pytest

from cqnls.grid import Field, make_grid

SEED = 20240611


def random_field(grid, rng, scale=1.0):
    z = rng.standard_normal((grid.J - 1, grid.K - 1)) + 1j * rng.standard_normal((grid.J - 1, grid.K - 1))
    return Field.from_interior(grid, scale * z)


def spike(grid, j=1, k=1, value=1.0):
    v = np.zeros(grid.shape, dtype=complex)
    v[j, k] = value
    return Field(grid, v)


@pytest.fixture
def rng(request):
    seed = SEED
    print(f"random seed {seed}")
    return np.random.default_rng(seed)


@pytest.fixture
def unit4():
    return make_grid(0, 1, 0, 1, 4, 4)


def assemble_dense(grid, tau, coeff):
    """Explicit matrix of W -> (2i/tau) W + delta^2 W + coeff W on interior unknowns,
    built entry by entry from the five-point stencil (row-major j, k ordering)."""
    nj, nk = grid.J - 1, grid.K - 1
    cx, cy = 1.0 / grid.dx**2, 1.0 / grid.dy**2
    A = np.zeros((nj * nk, nj * nk), dtype=complex)
    for j in range(nj):
        for k in range(nk):
            r = j * nk + k
            A[r, r] = 2j / tau - 2 * cx - 2 * cy + coeff[j, k]
            if j > 0:
                A[r, r - nk] = cx
            if j < nj - 1:
                A[r, r + nk] = cx
            if k > 0:
                A[r, r - 1] = cy
            if k < nk - 1:
                A[r, r + 1] = cy
    return A


# one summary line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
