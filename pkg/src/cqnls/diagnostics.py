"""Discrete invariants, error metrics and convergence rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .grid import Field, norm, norm_pow
from .nonlinearity import CubicQuinticCoeffs


@dataclass
class TimeSeriesRecord:
    times: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    amplitude: List[float] = field(default_factory=list)
    fp_iters: List[int] = field(default_factory=list)

    COLUMNS = ("t", "mass", "energy", "amplitude", "fp_iters")

    def record(self, t: float, u: Field, coeffs: CubicQuinticCoeffs, fp_iters: int = 0):
        if self.times and not t > self.times[-1]:
            raise ValueError("times must be strictly increasing")
        self.times.append(float(t))
        self.mass.append(norm_pow(u, 2))
        self.energy.append(discrete_energy(u, coeffs))
        self.amplitude.append(norm(u, "inf"))
        self.fp_iters.append(int(fp_iters))

    def rows(self):
        return zip(self.times, self.mass, self.energy, self.amplitude, self.fp_iters)


@dataclass
class ConvergenceReport:
    levels: List[Tuple[float, float]]
    e2: np.ndarray
    e1: np.ndarray
    rate2: np.ndarray = None
    rate1: np.ndarray = None

    COLUMNS = ("h", "tau", "E2", "rate2", "E1", "rate1")

    def __post_init__(self):
        self.e2 = np.asarray(self.e2, dtype=float)
        self.e1 = np.asarray(self.e1, dtype=float)
        if self.rate2 is None:
            self.rate2 = convergence_rates(self.e2)
        if self.rate1 is None:
            self.rate1 = convergence_rates(self.e1)

    def rows(self):
        n = len(self.levels)
        for i, (h, tau) in enumerate(self.levels):
            r2 = self.rate2[i] if i < n - 1 else math.nan
            r1 = self.rate1[i] if i < n - 1 else math.nan
            yield h, tau, self.e2[i], r2, self.e1[i], r1


def discrete_energy(u: Field, coeffs: CubicQuinticCoeffs) -> float:
    """E_h = ||delta^+ u||^2 - (lambda/2) ||u||_4^4 + (nu/3) ||u||_6^6."""
    return (norm_pow(u, "grad") - coeffs.lambda_ / 2.0 * norm_pow(u, 4)
            + coeffs.nu / 3.0 * norm_pow(u, 6))


def amplitude_theory(t, A0: float, epsilon: float, v0: Field):
    """Amplitude law A0 [1 + 2 eps ||v0||_4^4 ||v0||_2^{-2} A0^4 t]^{-1/2}."""
    k = norm_pow(v0, 4) / norm_pow(v0, 2)
    return A0 / np.sqrt(1.0 + 2.0 * epsilon * k * A0**4 * np.asarray(t, dtype=float))


def relative_errors(u_num: Field, u_ref: Field) -> Tuple[float, float]:
    """(E_2, E_1): relative discrete L2 and H1-seminorm errors against a reference."""
    if u_num.grid != u_ref.grid:
        raise ValueError("fields live on different grids")
    r2, r1 = norm(u_ref, 2), norm(u_ref, "grad")
    if r2 == 0 or r1 == 0:
        raise ValueError("reference field has zero norm")
    diff = u_num - u_ref
    return norm(diff, 2) / r2, norm(diff, "grad") / r1


def conservation_errors(u_n: Field, u0_continuous_mass: float, u0_continuous_energy: float,
                        coeffs: CubicQuinticCoeffs) -> Tuple[float, float]:
    """Absolute mass and energy deviations from the continuous initial values."""
    return (abs(norm_pow(u_n, 2) - u0_continuous_mass),
            abs(discrete_energy(u_n, coeffs) - u0_continuous_energy))


def convergence_rates(errors: Sequence[float]) -> np.ndarray:
    """log2(e_i / e_{i+1}) for consecutive factor-two refinements."""
    e = np.asarray(errors, dtype=float)
    if e.ndim != 1 or len(e) < 2:
        raise ValueError("need at least two error levels")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive")
    return np.log2(e[:-1] / e[1:])


def h1_energy_bound_holds(u: Field, coeffs: CubicQuinticCoeffs, slack: float = 1e-12) -> bool:
    """||delta^+ u||^2 + (nu/6)||u||_6^6 <= E_h(u) + (3 lambda^2 / 8 nu) ||u||_2^2."""
    lhs = norm_pow(u, "grad") + coeffs.nu / 6.0 * norm_pow(u, 6)
    rhs = discrete_energy(u, coeffs) + 3.0 * coeffs.lambda_**2 / (8.0 * coeffs.nu) * norm_pow(u, 2)
    return lhs <= rhs + slack * max(1.0, abs(rhs))
