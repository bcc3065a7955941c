"""Matrix-free solves for the linear systems met inside the time stepper.

The frozen-coefficient Crank-Nicolson operator

    W -> (2i/tau) W + delta^2 W + coeff * W,     W in the Dirichlet space,

is complex and non-Hermitian once damping is on, so it is solved with
BiCGSTAB working on interior arrays. The default preconditioner is the
operator diagonal (Jacobi); the optional spectral preconditioner inverts the
same operator with the coefficient replaced by its mean, which is diagonal
in the sine basis and keeps the iteration count flat for large tau/h^2. The constant
coefficient operator (shift - delta^2) used as the ground-state
preconditioner is diagonal in the discrete sine basis and is inverted
directly with a fast sine transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.fft

from .grid import Field, Grid2D, InvalidGridError, laplacian_dirichlet
from .nonlinearity import CubicQuinticCoeffs, quotient1, quotient2


PRECONDITIONERS = ("jacobi", "spectral")


class NoConvergence(RuntimeError):
    """Krylov iteration broke down or hit maxiter; carries the last relative residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class HelmholtzOperator:
    grid: Grid2D
    tau: float
    coeff: np.ndarray  # interior-shaped complex array

    def __post_init__(self):
        if self.coeff.shape != (self.grid.J - 1, self.grid.K - 1):
            raise InvalidGridError("coefficient array does not match interior node count")

    @property
    def diagonal(self) -> np.ndarray:
        g = self.grid
        return 2j / self.tau - 2.0 / g.dx**2 - 2.0 / g.dy**2 + self.coeff

    def matvec(self, w: np.ndarray) -> np.ndarray:
        """Operator action on an interior array."""
        g = self.grid
        return (2j / self.tau) * w + laplacian_dirichlet(w, g.dx, g.dy) + self.coeff * w

    def preconditioner(self, kind: str = "jacobi") -> Callable[[np.ndarray], np.ndarray]:
        """Approximate inverse v -> M^{-1} v for BiCGSTAB."""
        if kind == "jacobi":
            inv = 1.0 / self.diagonal
            return lambda v: v * inv
        if kind == "spectral":
            denom = (2j / self.tau + complex(np.mean(self.coeff))
                     + dirichlet_laplacian_eigenvalues(self.grid))
            return lambda v: dst2(dst2(v) / denom)
        raise ValueError(f"unknown preconditioner {kind!r}; choose from {PRECONDITIONERS}")


def frozen_coefficient(u_prev: np.ndarray, u_iter: np.ndarray,
                       coeffs: CubicQuinticCoeffs) -> np.ndarray:
    """lambda*q1 - nu*q2 + i*eps*|(u_iter + u_prev)/2|^2, pointwise."""
    a = u_iter.real**2 + u_iter.imag**2
    b = u_prev.real**2 + u_prev.imag**2
    c = coeffs.lambda_ * quotient1(a, b) - coeffs.nu * quotient2(a, b)
    if coeffs.epsilon:
        m = (u_iter + u_prev) / 2.0
        c = c + 1j * coeffs.epsilon * (m.real**2 + m.imag**2)
    return np.asarray(c, dtype=complex)


def build_operator(grid: Grid2D, tau: float, u_prev: Field, u_iter: Field,
                   coeffs: CubicQuinticCoeffs) -> HelmholtzOperator:
    if u_prev.grid != grid or u_iter.grid != grid:
        raise InvalidGridError("fields live on a different grid than the operator")
    if not tau > 0:
        raise ValueError(f"time step must be positive, got tau={tau}")
    return HelmholtzOperator(grid, float(tau),
                             frozen_coefficient(u_prev.interior, u_iter.interior, coeffs))


def apply(op: HelmholtzOperator, w: Field) -> Field:
    if w.grid != op.grid:
        raise InvalidGridError("field lives on a different grid than the operator")
    return Field.from_interior(op.grid, op.matvec(w.interior))


def default_maxiter(grid: Grid2D) -> int:
    return int(10 * np.sqrt((grid.J - 1) * (grid.K - 1))) + 200


def bicgstab(matvec, b: np.ndarray, x0: Optional[np.ndarray] = None,
             precond: Optional[Callable[[np.ndarray], np.ndarray]] = None, tol: float = 1e-12,
             maxiter: int = 1000) -> Tuple[np.ndarray, int]:
    """Right-preconditioned BiCGSTAB for complex arrays of any shape.

    Stops when the true residual satisfies ||b - A x|| <= tol * ||b||. The
    recursive residual is replaced by the true one whenever it claims
    convergence, so the returned x always honours the bound.
    """
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    if precond is None:
        def precond(v):
            return v

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=b.dtype)
    r = b - matvec(x) if x0 is not None else b.copy()
    rnorm = np.linalg.norm(r)
    if rnorm <= tol * bnorm:
        return x, 0

    it = 0
    restarts = 0
    while it < maxiter:
        r_hat = r.copy()
        rho = alpha = omega = 1.0 + 0j
        v = np.zeros_like(b)
        p = np.zeros_like(b)
        while it < maxiter:
            it += 1
            rho_new = np.vdot(r_hat, r)
            if rho_new == 0 or omega == 0:
                break  # breakdown: restart from the true residual
            beta = (rho_new / rho) * (alpha / omega)
            rho = rho_new
            p = r + beta * (p - omega * v)
            p_hat = precond(p)
            v = matvec(p_hat)
            denom = np.vdot(r_hat, v)
            if denom == 0:
                break
            alpha = rho / denom
            s = r - alpha * v
            if np.linalg.norm(s) <= tol * bnorm:
                x = x + alpha * p_hat
                r = s
                break
            s_hat = precond(s)
            t = matvec(s_hat)
            tt = np.vdot(t, t).real
            if tt == 0:
                x = x + alpha * p_hat
                r = s
                break
            omega = np.vdot(t, s) / tt
            x = x + alpha * p_hat + omega * s_hat
            r = s - omega * t
            if np.linalg.norm(r) <= tol * bnorm:
                break
        r = b - matvec(x)
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm:
            return x, it
        restarts += 1
        if restarts > 50:
            break
    raise NoConvergence("BiCGSTAB did not converge", float(rnorm / bnorm), it)


def solve(op: HelmholtzOperator, rhs: Field, tol: float = 1e-12,
          maxiter: Optional[int] = None, x0: Optional[Field] = None,
          precond: str = "jacobi") -> Tuple[Field, int]:
    """Solve op(W) = rhs; returns W and the Krylov iteration count."""
    if rhs.grid != op.grid:
        raise InvalidGridError("rhs lives on a different grid than the operator")
    if not tol > 0:
        raise ValueError("tol must be positive")
    maxiter = default_maxiter(op.grid) if maxiter is None else maxiter
    if maxiter < 1:
        raise ValueError("maxiter must be >= 1")
    w, its = bicgstab(op.matvec, rhs.interior.copy(),
                      None if x0 is None else x0.interior,
                      op.preconditioner(precond), tol, maxiter)
    return Field.from_interior(op.grid, w), its


def dirichlet_laplacian_eigenvalues(grid: Grid2D) -> np.ndarray:
    """Eigenvalues of the five-point delta^2 on the sine modes (p, q), shape (J-1, K-1)."""
    p = np.arange(1, grid.J)
    q = np.arange(1, grid.K)
    lx = -4.0 / grid.dx**2 * np.sin(p * np.pi / (2 * grid.J)) ** 2
    ly = -4.0 / grid.dy**2 * np.sin(q * np.pi / (2 * grid.K)) ** 2
    return lx[:, None] + ly[None, :]


def dst2(w: np.ndarray) -> np.ndarray:
    """Orthonormal 2D type-I sine transform of an interior array (its own inverse)."""
    return scipy.fft.dstn(w, type=1, norm="ortho", workers=1)


class ShiftedLaplacianSolver:
    """Direct solver for (shift - delta^2) W = rhs on the Dirichlet space."""

    def __init__(self, grid: Grid2D, shift: float):
        if not shift > 0:
            raise ValueError("shift must be positive")
        self.grid = grid
        self.shift = float(shift)
        self._denom = self.shift - dirichlet_laplacian_eigenvalues(grid)

    def solve_interior(self, rhs: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(rhs):
            return self.solve_interior(rhs.real) + 1j * self.solve_interior(rhs.imag)
        return dst2(dst2(rhs) / self._denom)
