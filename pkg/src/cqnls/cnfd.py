"""Crank-Nicolson finite-difference time stepper.

Each step solves the implicit scheme

    i (U^{n+1} - U^n)/tau + delta^2 U^{n+1/2} + lambda psi1(U^{n+1}, U^n)
        - nu psi2(U^{n+1}, U^n) + i eps varphi(U^{n+1}, U^n) = 0

by fixed-point iteration: the nonlinear coefficient is frozen at the current
iterate, the resulting linear system is solved with BiCGSTAB, and the loop
stops once successive iterates agree to ``fp_tol`` in relative discrete L2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .grid import Field, apply_delta2, laplacian_dirichlet
from .linsolve import (PRECONDITIONERS, HelmholtzOperator, bicgstab, default_maxiter,
                       frozen_coefficient)
from .nonlinearity import CubicQuinticCoeffs, psi1, psi2, varphi


@dataclass(frozen=True)
class SolverParams:
    coeffs: CubicQuinticCoeffs
    tau: float
    t_final: float
    fp_tol: float = 1e-8
    fp_maxiter: int = 100
    lin_tol: float = 1e-12
    lin_maxiter: Optional[int] = None
    lin_precond: str = "jacobi"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0 < self.fp_tol < 1:
            raise ValueError(f"fp_tol must lie in (0, 1), got {self.fp_tol}")
        if not self.t_final >= self.tau * (1 - 1e-9):
            raise ValueError(f"t_final={self.t_final} is shorter than one step tau={self.tau}")
        if self.fp_maxiter < 1:
            raise ValueError("fp_maxiter must be >= 1")
        if self.lin_precond not in PRECONDITIONERS:
            raise ValueError(f"lin_precond must be one of {PRECONDITIONERS}")

    @property
    def n_steps(self) -> int:
        return steps_for(self.t_final, self.tau)


def steps_for(t: float, tau: float) -> int:
    """Number of steps to reach time t; t must be an integer multiple of tau."""
    n = round(t / tau)
    if n < 1 or abs(n * tau - t) > 1e-9 * max(abs(t), tau):
        raise ValueError(f"t={t} is not a positive integer multiple of tau={tau}")
    return int(n)


@dataclass
class StepReport:
    fixed_point_iters: int
    final_fp_residual: float
    total_krylov_iters: int


class StepFailure(RuntimeError):
    """The fixed-point loop did not converge; keeps the per-iteration update norms."""

    def __init__(self, message: str, history: List[float], step_index: Optional[int] = None):
        where = f" at step {step_index}" if step_index is not None else ""
        super().__init__(f"{message}{where}")
        self.history = history
        self.step_index = step_index


def cn_step(u_n: Field, tau: float, coeffs: CubicQuinticCoeffs, fp_tol: float = 1e-8,
            fp_maxiter: int = 100, lin_tol: float = 1e-12,
            lin_maxiter: Optional[int] = None,
            lin_precond: str = "jacobi") -> Tuple[Field, StepReport]:
    """One Crank-Nicolson step with an explicit (possibly negative) time step."""
    g = u_n.grid
    dxdy = g.dx * g.dy
    maxit = default_maxiter(g) if lin_maxiter is None else lin_maxiter
    U = u_n.interior
    shift = 2j / tau
    base_rhs = shift * U - laplacian_dirichlet(U, g.dx, g.dy)

    W_prev = U
    krylov = 0
    history: List[float] = []
    for l in range(1, fp_maxiter + 1):
        c = frozen_coefficient(U, W_prev, coeffs)
        op = HelmholtzOperator(g, tau, c)
        W, its = bicgstab(op.matvec, base_rhs - c * U, x0=W_prev,
                          precond=op.preconditioner(lin_precond), tol=lin_tol, maxiter=maxit)
        krylov += its
        diff = math.sqrt(dxdy * float(np.sum(np.abs(W - W_prev) ** 2)))
        wn = math.sqrt(dxdy * float(np.sum(np.abs(W) ** 2)))
        res = diff / wn if wn > 0 else diff
        history.append(res)
        if res <= fp_tol:
            return Field.from_interior(g, W), StepReport(l, res, krylov)
        W_prev = W
    raise StepFailure(f"fixed-point iteration did not reach {fp_tol:g} in {fp_maxiter} iterations",
                      history)


def step(u_n: Field, params: SolverParams) -> Tuple[Field, StepReport]:
    return cn_step(u_n, params.tau, params.coeffs, params.fp_tol, params.fp_maxiter,
                   params.lin_tol, params.lin_maxiter, params.lin_precond)


Observer = Callable[[int, Field, StepReport], None]


def evolve(u0: Field, params: SolverParams, observer: Optional[Observer] = None) -> Field:
    """Apply ``params.n_steps`` steps; observer(n, U^n, report) runs after step n (1-based)."""
    u = u0
    for n in range(1, params.n_steps + 1):
        try:
            u, report = step(u, params)
        except StepFailure as exc:
            raise StepFailure(str(exc), exc.history, n) from exc
        if observer is not None:
            observer(n, u, report)
    return u


def scheme_residual(u_next: Field, u_n: Field, tau: float, coeffs: CubicQuinticCoeffs) -> Field:
    """Left-hand side of the nonlinear scheme evaluated at a candidate pair, interior nodes."""
    z, w = u_next.values, u_n.values
    r = (1j * (z - w) / tau + apply_delta2((u_next + u_n) * 0.5).values
         + coeffs.lambda_ * psi1(z, w) - coeffs.nu * psi2(z, w)
         + 1j * coeffs.epsilon * varphi(z, w))
    out = np.zeros_like(r)
    out[1:-1, 1:-1] = r[1:-1, 1:-1]
    return Field(u_n.grid, out)
