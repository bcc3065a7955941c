import math
import warnings

import numpy as np
import pytest

from cqnls.cnfd import SolverParams, evolve
from cqnls.diagnostics import discrete_energy
from cqnls.grid import Field, grid_from_spacing, laplacian_interior, make_grid, mass, norm
from cqnls.groundstate import (NoGroundState, SolitonICParams, TruncationWarning, aitem_solve,
                               build_soliton_ic, gaussian_vortex_ic, gaussian_vortex_invariants,
                               sech_seed)
from cqnls.nonlinearity import CubicQuinticCoeffs

FLAT_TOP = CubicQuinticCoeffs(1.0, 1.0, 0.0)


@pytest.fixture(scope="module")
def soliton():
    g = grid_from_spacing(-20, 20, -20, 20, 0.25)
    return aitem_solve(g, FLAT_TOP, 60.0, sech_seed(g))


def stationary_residual(v, c):
    g = v.grid
    w = v.values.real
    inner = w[1:-1, 1:-1]
    r = laplacian_interior(w, g.dx, g.dy) + c.lambda_ * inner**3 - c.nu * inner**5
    return r


def test_ground_state_mu_and_contract(soliton):
    assert abs(soliton.mu - 0.1415) <= 5e-3
    assert soliton.residual <= 1e-9
    assert soliton.power == pytest.approx(60.0, rel=1e-8)
    assert mass(soliton.profile) == pytest.approx(60.0, rel=1e-8)


def test_residual_recomputed_independently(soliton):
    g = soliton.profile.grid
    r = stationary_residual(soliton.profile, FLAT_TOP) - soliton.mu * soliton.profile.interior.real
    assert math.sqrt(g.dx * g.dy * np.sum(r**2)) <= 1e-9 * 1.01


def test_profile_is_real_positive_and_centred(soliton):
    v = soliton.profile.values
    g = soliton.profile.grid
    assert np.max(np.abs(v.imag)) <= 1e-10
    X, Y = g.mesh()
    plateau = X**2 + Y**2 < 9
    assert v.real[plateau].min() > 0
    j, k = np.unravel_index(np.argmax(v.real), v.shape)
    assert abs(g.x[j]) <= g.dx and abs(g.y[k]) <= g.dy


def test_mu_converges_at_second_order():
    mus = []
    for h in (0.5, 0.25, 0.125):
        g = grid_from_spacing(-20, 20, -20, 20, h)
        mus.append(aitem_solve(g, FLAT_TOP, 60.0, sech_seed(g)).mu)
    order = math.log2(abs(mus[0] - mus[1]) / abs(mus[1] - mus[2]))
    assert order >= 1.5


def test_aitem_errors():
    g = make_grid(-5, 5, -5, 5, 20, 20)
    with pytest.raises(ValueError):
        aitem_solve(g, FLAT_TOP, 0.0, sech_seed(g))
    with pytest.raises(ValueError):
        aitem_solve(g, FLAT_TOP, 1.0, sech_seed(g) * 1j)
    with pytest.raises(NoGroundState):
        aitem_solve(g, FLAT_TOP, 1.0, g.zeros())
    with pytest.raises(NoGroundState):
        aitem_solve(g, FLAT_TOP, 10.0, sech_seed(g), maxiter=3)


def test_identity_dressing(soliton):
    u0 = build_soliton_ic(soliton.profile, SolitonICParams())
    np.testing.assert_array_equal(u0.values, soliton.profile.values)


@pytest.mark.filterwarnings("ignore::cqnls.groundstate.TruncationWarning")
def test_grid_aligned_shift_is_an_index_shift(soliton):
    g = soliton.profile.grid
    u0 = build_soliton_ic(soliton.profile, SolitonICParams(x0=-2.5, y0=2.0, d1=1.0, d2=-0.8))
    sj, sk = -10, 8
    v = soliton.profile.values.real
    np.testing.assert_allclose(np.abs(u0.values[20:-20, 20:-20]),
                               v[20 - sj:-20 - sj, 20 - sk:-20 - sk], rtol=1e-14, atol=1e-300)
    assert u0.grid == g


def test_off_grid_shift_interpolates(soliton):
    p = SolitonICParams(x0=0.1, y0=-0.05)
    u0 = build_soliton_ic(soliton.profile, p)
    assert mass(u0) == pytest.approx(60.0, rel=1e-3)
    assert np.max(np.abs(u0.values.imag)) == 0


def test_phase_gradient(soliton):
    d1 = 1.0
    u0 = build_soliton_ic(soliton.profile, SolitonICParams(d1=d1, alpha0=0.3))
    g = u0.grid
    jc, kc = g.J // 2, g.K // 2
    ratio = u0.values[jc + 1, kc] / u0.values[jc, kc]
    assert np.angle(ratio) == pytest.approx(d1 * g.dx / 2, abs=1e-3)
    assert np.angle(u0.values[jc, kc]) == pytest.approx(0.3, abs=1e-12)


def test_truncation_warning(soliton):
    with pytest.warns(TruncationWarning):
        build_soliton_ic(soliton.profile, SolitonICParams(x0=15.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_soliton_ic(soliton.profile, SolitonICParams(x0=1.0))


def test_gaussian_vortex_values():
    g = grid_from_spacing(-10, 10, -10, 10, 2.0**-4)
    u0 = gaussian_vortex_ic(g)
    assert u0.values[g.J // 2, g.K // 2] == 0
    assert abs(mass(u0) - 4.0) <= 1e-6
    np.testing.assert_array_equal(u0.values[::-1, ::-1], -u0.values)


def test_gaussian_vortex_invariants_against_quadrature():
    # trapezoidal quadrature is spectrally accurate for this smooth, fast-decaying beam
    c = CubicQuinticCoeffs(1.0, 0.01)
    x = np.linspace(-12, 12, 1201)
    X, Y = np.meshgrid(x, x, indexing="ij")
    pre = 2 / math.sqrt(math.pi) * np.exp(-(X**2 + Y**2) / 2)
    u = pre * (X + 1j * Y)
    ux = pre * (1 - X * (X + 1j * Y))
    uy = pre * (1j - Y * (X + 1j * Y))

    def integral(f):
        return np.trapezoid(np.trapezoid(f, x, axis=1), x)

    m = integral(np.abs(u) ** 2)
    e = (integral(np.abs(ux) ** 2 + np.abs(uy) ** 2) - c.lambda_ / 2 * integral(np.abs(u) ** 4)
         + c.nu / 3 * integral(np.abs(u) ** 6))
    m_closed, e_closed = gaussian_vortex_invariants(c)
    assert m == pytest.approx(m_closed, rel=1e-12)
    assert e == pytest.approx(e_closed, rel=1e-12)


def test_vortex_discrete_energy_tends_to_closed_form():
    c = CubicQuinticCoeffs(1.0, 0.01)
    _, e = gaussian_vortex_invariants(c)
    errs = []
    for h in (0.25, 0.125):
        g = grid_from_spacing(-10, 10, -10, 10, h)
        errs.append(abs(discrete_energy(gaussian_vortex_ic(g), c) - e))
    assert 1.9 <= math.log2(errs[0] / errs[1]) <= 2.1


def test_stationary_soliton_stays_put(soliton):
    v0 = soliton.profile
    u0 = build_soliton_ic(v0, SolitonICParams())
    worst = [0.0]

    def obs(n, u, rep):
        worst[0] = max(worst[0], float(np.max(np.abs(np.abs(u.values) - v0.values.real))))

    evolve(u0, SolverParams(FLAT_TOP, 0.0125, 1.0), obs)
    assert worst[0] <= 1e-2
