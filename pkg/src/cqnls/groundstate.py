"""Soliton ground states and the two families of initial data.

The stationary profile solves

    delta^2 v + lambda v^3 - nu v^5 = mu v

at a prescribed power ||v||_{2,h}^2 = P. It is found by accelerated
imaginary-time evolution: a gradient flow preconditioned with
(c - delta^2)^{-1} and renormalised to the target power after every update.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .grid import Field, Grid2D, laplacian_dirichlet, with_zero_boundary
from .linsolve import ShiftedLaplacianSolver
from .nonlinearity import CubicQuinticCoeffs


class NoGroundState(RuntimeError):
    pass


class TruncationWarning(UserWarning):
    """A shifted soliton loses a non-negligible part of its power outside the domain."""


@dataclass(frozen=True)
class GroundStateResult:
    profile: Field
    mu: float
    power: float
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class SolitonICParams:
    A0: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    alpha0: float = 0.0


def sech_seed(grid: Grid2D) -> Field:
    """The seed sech(x^2 + y^2) used for the cubic-quintic ground state."""
    def sech(s):
        e = np.exp(-s)
        return 2.0 * e / (1.0 + e * e)

    return Field.from_function(grid, lambda X, Y: sech(X**2 + Y**2))


def _stationary_operator(v: np.ndarray, grid: Grid2D, coeffs: CubicQuinticCoeffs) -> np.ndarray:
    v2 = v * v
    return (laplacian_dirichlet(v, grid.dx, grid.dy)
            + coeffs.lambda_ * v2 * v - coeffs.nu * v2 * v2 * v)


def aitem_solve(grid: Grid2D, coeffs: CubicQuinticCoeffs, P_target: float, seed: Field,
                tol: float = 1e-9, maxiter: int = 20000, shift: Optional[float] = None,
                dt: Optional[float] = None) -> GroundStateResult:
    """Power-normalised ground state by accelerated imaginary-time evolution.

    ``shift`` (c) defaults to max(1, 2 mu_est) with mu_est = 3 lambda^2 / (16 nu),
    the upper end of the soliton band for lambda > 0 (the Rayleigh quotient of
    a power-scaled seed is useless as an estimate). ``dt`` defaults to 0.8 / c.
    Raises NoGroundState if maxiter is exhausted or the iterate collapses.
    """
    if not P_target > 0:
        raise ValueError("target power must be positive")
    if seed.grid != grid:
        raise ValueError("seed lives on a different grid")
    if np.any(seed.interior.imag != 0):
        raise ValueError("seed must be real")
    dxdy = grid.dx * grid.dy
    v = seed.interior.real.copy()

    def power(w):
        return dxdy * float(np.sum(w * w))

    p0 = power(v)
    if p0 == 0:
        raise NoGroundState("seed is identically zero")
    v *= math.sqrt(P_target / p0)

    mu_est = 3.0 * coeffs.lambda_**2 / (16.0 * coeffs.nu) if coeffs.lambda_ > 0 else 0.0
    c = max(1.0, 2.0 * mu_est) if shift is None else float(shift)
    dt = 0.8 / c if dt is None else float(dt)
    precond = ShiftedLaplacianSolver(grid, c)

    residual = math.inf
    for it in range(maxiter + 1):
        Lv = _stationary_operator(v, grid, coeffs)
        mu = dxdy * float(np.sum(Lv * v)) / power(v)
        r = Lv - mu * v
        residual = math.sqrt(dxdy * float(np.sum(r * r)))
        if not math.isfinite(residual):
            raise NoGroundState(f"iteration diverged at step {it}")
        if residual <= tol:
            profile = Field.from_interior(grid, v)
            return GroundStateResult(profile, mu, power(v), residual, it)
        if it == maxiter:
            break
        v = v + dt * precond.solve_interior(r)
        pv = power(v)
        if not pv > 1e-300 or not np.isfinite(pv):
            raise NoGroundState(f"iterate collapsed at iteration {it}")
        v *= math.sqrt(P_target / pv)
    raise NoGroundState(f"no convergence in {maxiter} iterations (residual {residual:.3e})")


def _aligned_shift(grid: Grid2D, x0: float, y0: float) -> Optional[Tuple[int, int]]:
    sj, sk = x0 / grid.dx, y0 / grid.dy
    if abs(sj - round(sj)) < 1e-9 and abs(sk - round(sk)) < 1e-9:
        return round(sj), round(sk)
    return None


def _shift_profile(v0: Field, p: SolitonICParams, grid: Grid2D) -> np.ndarray:
    """|v0| sampled at (x - x0, y - y0) on the nodes of ``grid``."""
    src = v0.grid
    vals = v0.values.real
    if grid == src:
        shift = _aligned_shift(src, p.x0, p.y0)
        if shift is not None:
            sj, sk = shift
            out = np.zeros_like(vals)
            J1, K1 = vals.shape
            js, jd = (slice(0, J1 - sj), slice(sj, J1)) if sj >= 0 else (slice(-sj, J1), slice(0, J1 + sj))
            ks, kd = (slice(0, K1 - sk), slice(sk, K1)) if sk >= 0 else (slice(-sk, K1), slice(0, K1 + sk))
            out[jd, kd] = vals[js, ks]
            return out
    interp = RegularGridInterpolator((src.x, src.y), vals, method="linear",
                                     bounds_error=False, fill_value=0.0)
    X, Y = grid.mesh()
    pts = np.stack([(X - p.x0).ravel(), (Y - p.y0).ravel()], axis=-1)
    return interp(pts).reshape(grid.shape)


def _truncated_fraction(v0: Field, p: SolitonICParams, grid: Grid2D) -> float:
    """Share of the profile power that the shift moves outside ``grid``'s domain."""
    X, Y = v0.grid.mesh()
    Xs, Ys = X + p.x0, Y + p.y0
    outside = (Xs <= grid.a) | (Xs >= grid.b) | (Ys <= grid.c) | (Ys >= grid.d)
    w = np.abs(v0.values) ** 2
    total = float(np.sum(w))
    return float(np.sum(w[outside])) / total if total > 0 else 0.0


def build_soliton_ic(v0: Field, p: SolitonICParams, grid: Optional[Grid2D] = None) -> Field:
    """A0 v0(x - x0, y - y0) exp(i alpha0 + i (d1 (x - x0) + d2 (y - y0)) / 2).

    The profile is shifted by whole nodes when the offset is grid-aligned on
    the profile's own grid, otherwise interpolated bilinearly. Emits a
    TruncationWarning when more than 1e-6 of the power falls outside.
    """
    grid = v0.grid if grid is None else grid
    amp = _shift_profile(v0, p, grid)
    X, Y = grid.mesh()
    phase = p.alpha0 + 0.5 * (p.d1 * (X - p.x0) + p.d2 * (Y - p.y0))
    u0 = Field(grid, with_zero_boundary(p.A0 * amp * np.exp(1j * phase)))
    lost = _truncated_fraction(v0, p, grid)
    if lost > 1e-6:
        warnings.warn(f"shifted soliton loses {lost:.2e} of its power",
                      TruncationWarning, stacklevel=2)
    return u0


def gaussian_vortex_ic(grid: Grid2D) -> Field:
    """(2/sqrt(pi)) (x + i y) exp(-(x^2 + y^2)/2), zero on the boundary."""
    return Field.from_function(
        grid, lambda X, Y: 2.0 / math.sqrt(math.pi) * (X + 1j * Y) * np.exp(-0.5 * (X**2 + Y**2)))


def gaussian_vortex_invariants(coeffs: CubicQuinticCoeffs) -> Tuple[float, float]:
    """Continuous mass and energy of the Gaussian vortex beam on the whole plane.

    ||u||^2 = 4, ||grad u||^2 = 8, int |u|^4 = 4/pi, int |u|^6 = 128/(27 pi^2);
    the truncation to [-10, 10]^2 changes these by less than e^{-100}.
    """
    energy = (8.0 - coeffs.lambda_ / 2.0 * 4.0 / math.pi
              + coeffs.nu / 3.0 * 128.0 / (27.0 * math.pi**2))
    return 4.0, energy
