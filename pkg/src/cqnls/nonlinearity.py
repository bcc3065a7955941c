"""Pointwise nonlinear terms of the Crank-Nicolson scheme.

All functions accept scalars or numpy arrays and broadcast. psi1/psi2 are
always evaluated through their integrated closed forms, which have no
removable singularity at |z| = |w|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CubicQuinticCoeffs:
    """Cubic (lambda_), quintic (nu) and cubic-damping (epsilon) coefficients."""

    lambda_: float
    nu: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"quintic coefficient must be positive, got nu={self.nu}")
        if not self.epsilon >= 0:
            raise ValueError(f"damping must be nonnegative, got epsilon={self.epsilon}")


def f1(s):
    return s


def f2(s):
    return s * s


def primitive_F(rho, which: int):
    """F1(rho) = rho^2/2 or F2(rho) = rho^3/3."""
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise ValueError("primitive_F is defined for rho >= 0 only")
    if which == 1:
        out = r * r / 2.0
    elif which == 2:
        out = r**3 / 3.0
    else:
        raise ValueError(f"which must be 1 or 2, got {which}")
    return out if np.ndim(rho) else float(out)


def quotient1(az2, bz2):
    """(F1(a) - F1(b)) / (a - b) in closed form, for a = |z|^2, b = |w|^2."""
    return (az2 + bz2) / 2.0


def quotient2(az2, bz2):
    """(F2(a) - F2(b)) / (a - b) in closed form."""
    return (az2 * az2 + az2 * bz2 + bz2 * bz2) / 3.0


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def psi1(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = quotient1(_abs2(z), _abs2(w)) * (z + w) / 2.0
    return out if out.ndim else complex(out)


def psi2(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = quotient2(_abs2(z), _abs2(w)) * (z + w) / 2.0
    return out if out.ndim else complex(out)


def varphi(z, w):
    m = (np.asarray(z, dtype=complex) + np.asarray(w, dtype=complex)) / 2.0
    out = _abs2(m) * m
    return out if out.ndim else complex(out)
