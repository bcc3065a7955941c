import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cqnls.grid import (Field, InvalidGridError, apply_delta2, apply_delta_plus, grad_inner_h,
                        grid_from_spacing, inner_h, make_grid, mass, norm, norm_pow)

from conftest import random_field, spike


def test_make_grid_unit_square():
    g = make_grid(0, 1, 0, 1, 4, 4)
    assert g.dx == g.dy == 0.25
    assert g.node(2, 2) == (0.5, 0.5)


def test_make_grid_reference_mesh():
    g = make_grid(-60, 60, -60, 60, 1920, 1920)
    assert g.dx == g.dy == 2.0**-4


@pytest.mark.parametrize("args", [(0, 1, 0, 1, 1, 4), (0, 1, 0, 1, 4, 1), (1, 0, 0, 1, 4, 4),
                                  (0, 1, 1, 1, 4, 4)])
def test_make_grid_rejects(args):
    with pytest.raises(InvalidGridError):
        make_grid(*args)


def test_grid_from_spacing():
    g = grid_from_spacing(-10, 10, -10, 10, 0.25)
    assert (g.J, g.K) == (80, 80)
    with pytest.raises(InvalidGridError):
        grid_from_spacing(0, 1, 0, 1, 0.3)


def test_field_rejects_nonzero_boundary(unit4):
    v = np.zeros(unit4.shape, dtype=complex)
    v[0, 2] = 1
    with pytest.raises(ValueError):
        Field(unit4, v)
    with pytest.raises(InvalidGridError):
        Field(unit4, np.zeros((4, 4)))


def test_field_is_read_only(unit4):
    u = spike(unit4)
    with pytest.raises(ValueError):
        u.values[1, 1] = 2


def test_delta2_zero(unit4):
    assert np.all(apply_delta2(unit4.zeros()).values == 0)


def test_delta2_spike(unit4):
    r = apply_delta2(spike(unit4)).values
    assert r[1, 1] == -64
    assert r[2, 1] == 16 and r[1, 2] == 16
    assert r[3, 3] == 0
    assert np.all(r[0, :] == 0) and np.all(r[:, 0] == 0)


def test_delta2_sine_mode_second_order():
    g = make_grid(0, 1, 0, 1, 64, 64)
    u = Field.from_function(g, lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y))
    err = np.max(np.abs(apply_delta2(u).values - (-2 * np.pi**2) * u.values))
    # Taylor: (4/h^2) sin^2(pi h/2) = pi^2 - pi^4 h^2/12 + O(h^4), twice (x and y)
    C = np.pi**4 / 6
    assert err <= C * g.h**2
    assert err >= 0.9 * C * g.h**2  # genuinely second order, not better


def test_delta_plus_spike(unit4):
    gx, gy = apply_delta_plus(spike(unit4))
    assert gx.shape == (4, 5) and gy.shape == (5, 4)
    assert gx[0, 1] == 4 and gx[1, 1] == -4 and gx[2, 1] == 0
    assert gy[1, 0] == 4 and gy[1, 1] == -4
    assert np.all(gx.sum(axis=0) == 0)  # telescoping columns of a Dirichlet field
    assert np.all(apply_delta_plus(unit4.zeros())[0] == 0)


def test_inner_and_norms_spike(unit4):
    u = spike(unit4)
    assert inner_h(unit4.zeros(), u) == 0
    assert inner_h(u, u) == 0.0625
    assert norm(u, 2) ** 2 == pytest.approx(0.0625, abs=1e-15)
    assert norm(u, "inf") == 1
    assert norm_pow(u, "grad") == pytest.approx(4.0, abs=1e-14)
    assert norm(u, "grad") == pytest.approx(2.0, abs=1e-14)
    for p in (2, 4, 6, 8, "inf", "grad"):
        assert norm(unit4.zeros(), p) == 0


def test_norm_rejects_unsupported(unit4):
    with pytest.raises(ValueError):
        norm(unit4.zeros(), 3)


def test_inner_grid_mismatch(unit4):
    with pytest.raises(InvalidGridError):
        inner_h(unit4.zeros(), make_grid(0, 1, 0, 1, 5, 4).zeros())


@pytest.mark.parametrize("p", [2, 4, 6, 8])
def test_norm_homogeneity(rng, p):
    g = make_grid(-1, 2, 0, 1, 12, 9)
    u = random_field(g, rng)
    alpha = 0.7 - 1.3j
    assert norm_pow(u * alpha, p) == pytest.approx(abs(alpha) ** p * norm_pow(u, p), rel=1e-13)


def test_inner_products_on_dirichlet_fields(rng):
    g = make_grid(0, 3, -1, 1, 10, 7)
    for _ in range(20):
        u, v = random_field(g, rng), random_field(g, rng)
        assert inner_h(u, v) == pytest.approx(inner_h(u, v, interior=True), rel=1e-14)
        assert inner_h(u, v) == pytest.approx(inner_h(v, u).conjugate(), rel=1e-14)
        uu = inner_h(u, u)
        assert uu.imag == 0 and uu.real >= 0
        assert uu.real == pytest.approx(mass(u), rel=1e-14)


@pytest.mark.parametrize("shape", [(8, 8), (32, 32), (64, 64), (12, 20)])
def test_green_identities(rng, shape):
    J, K = shape
    g = make_grid(0, 1.5, 0, 1.0, J, K)
    for _ in range(50):
        u, v = random_field(g, rng), random_field(g, rng)
        d2 = apply_delta2(u)
        # split delta^2 into its x and y parts via single-direction grids
        ux = u.values
        dxx = np.zeros(g.shape, dtype=complex)
        dxx[1:-1, 1:-1] = (ux[2:, 1:-1] - 2 * ux[1:-1, 1:-1] + ux[:-2, 1:-1]) / g.dx**2
        dyy = d2.values - dxx
        bound = 1e-12 * norm(u) * norm(v) / g.h**2
        assert abs(inner_h(Field(g, dxx), v, interior=True) + grad_inner_h(u, v, "x")) <= bound
        assert abs(inner_h(Field(g, dyy), v, interior=True) + grad_inner_h(u, v, "y")) <= bound


@pytest.mark.parametrize("shape", [(8, 8), (32, 32), (16, 40)])
def test_discrete_sobolev_inequalities(rng, shape):
    g = make_grid(-2, 2, -1, 3, *shape)
    for i in range(100):
        u = random_field(g, rng, scale=10.0 ** rng.uniform(-3, 3))
        n2, n4, n6, n8 = (norm_pow(u, p) for p in (2, 4, 6, 8))
        grad = norm_pow(u, "grad")
        assert n4 <= 0.5 * n2 * grad
        assert n8 <= 2 * n6 * grad


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(0.1, 10), st.floats(0.1, 10))
def test_delta2_linearity_random_grids(J, K, Lx, Ly):
    g = make_grid(0, Lx, 0, Ly, J, K)
    rng = np.random.default_rng(J * 100 + K)
    u, v = random_field(g, rng), random_field(g, rng)
    lhs = apply_delta2(u * 2.0 + v).values
    rhs = 2.0 * apply_delta2(u).values + apply_delta2(v).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(rhs).max())
