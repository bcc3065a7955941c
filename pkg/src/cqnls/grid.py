"""Uniform Cartesian grid, Dirichlet grid functions and finite-difference operators.

Grid functions live on the (J+1) x (K+1) nodes of the rectangle [a, b] x [c, d]
and vanish on the boundary. Reductions (inner products, norms) run over the
index ranges j = 0..J-1, k = 0..K-1 unless the interior-only bracket is asked
for, which sums j = 1..J-1, k = 1..K-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np


class InvalidGridError(ValueError):
    """Raised for bad domain bounds, cell counts, or mismatched grids."""


@dataclass(frozen=True)
class Grid2D:
    a: float
    b: float
    c: float
    d: float
    J: int
    K: int

    def __post_init__(self):
        if int(self.J) != self.J or int(self.K) != self.K:
            raise InvalidGridError("cell counts must be integers")
        if self.J < 2 or self.K < 2:
            raise InvalidGridError(f"need J, K >= 2, got J={self.J}, K={self.K}")
        if not (self.b > self.a and self.d > self.c):
            raise InvalidGridError(
                f"empty domain [{self.a}, {self.b}] x [{self.c}, {self.d}]")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.J

    @property
    def dy(self) -> float:
        return (self.d - self.c) / self.K

    @property
    def h(self) -> float:
        return max(self.dx, self.dy)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.J + 1, self.K + 1)

    @property
    def x(self) -> np.ndarray:
        return self.a + np.arange(self.J + 1) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.c + np.arange(self.K + 1) * self.dy

    def node(self, j: int, k: int) -> Tuple[float, float]:
        return (self.a + j * self.dx, self.c + k * self.dy)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates as (X, Y) arrays indexed [j, k]."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape, dtype=complex))


def make_grid(a: float, b: float, c: float, d: float, J: int, K: int) -> Grid2D:
    return Grid2D(float(a), float(b), float(c), float(d), int(J), int(K))


def grid_from_spacing(a: float, b: float, c: float, d: float, h: float) -> Grid2D:
    """Grid with dx = dy = h; the domain lengths must be integer multiples of h."""
    J = (b - a) / h
    K = (d - c) / h
    if abs(J - round(J)) > 1e-9 * J or abs(K - round(K)) > 1e-9 * K:
        raise InvalidGridError(f"h={h} does not divide the domain evenly")
    return make_grid(a, b, c, d, round(J), round(K))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex grid function in the Dirichlet space (zero on every boundary node)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise InvalidGridError(
                f"values shape {v.shape} does not match grid {self.grid.shape}")
        if (np.any(v[0, :] != 0) or np.any(v[-1, :] != 0)
                or np.any(v[:, 0] != 0) or np.any(v[:, -1] != 0)):
            raise ValueError("field does not vanish on the boundary")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid2D, f) -> "Field":
        """Sample f(X, Y) at the nodes and force the boundary to zero."""
        X, Y = grid.mesh()
        v = np.array(f(X, Y), dtype=complex)
        return cls(grid, with_zero_boundary(v))

    @classmethod
    def from_interior(cls, grid: Grid2D, interior: np.ndarray) -> "Field":
        v = np.zeros(grid.shape, dtype=complex)
        v[1:-1, 1:-1] = interior
        return cls(grid, v)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise InvalidGridError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, alpha):
        return Field(self.grid, self.values * complex(alpha))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __abs__(self):
        return Field(self.grid, np.abs(self.values).astype(complex))

    def conj(self) -> "Field":
        return Field(self.grid, self.values.conj())


def with_zero_boundary(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=complex)
    v[0, :] = v[-1, :] = 0
    v[:, 0] = v[:, -1] = 0
    return v


def _same_grid(u: Field, v: Field) -> Grid2D:
    if u.grid != v.grid:
        raise InvalidGridError("fields live on different grids")
    return u.grid


# -- array kernels (interior-shaped or full-shaped numpy arrays) -------------


def laplacian_interior(v: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Five-point Laplacian of a full node array, evaluated at interior nodes."""
    c = v[1:-1, 1:-1]
    return ((v[2:, 1:-1] - 2.0 * c + v[:-2, 1:-1]) / dx**2
            + (v[1:-1, 2:] - 2.0 * c + v[1:-1, :-2]) / dy**2)


def laplacian_dirichlet(w: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Five-point Laplacian of an interior array with zero boundary values."""
    out = -2.0 * (1.0 / dx**2 + 1.0 / dy**2) * w
    out[1:, :] += w[:-1, :] / dx**2
    out[:-1, :] += w[1:, :] / dx**2
    out[:, 1:] += w[:, :-1] / dy**2
    out[:, :-1] += w[:, 1:] / dy**2
    return out


def _rsum(a: np.ndarray) -> float:
    # numpy reduces a contiguous buffer with fixed-order pairwise summation
    return float(np.sum(np.ascontiguousarray(a).ravel()))


def _cdot_sum(u: np.ndarray, v: np.ndarray) -> complex:
    """sum(u * conj(v)) with real and imaginary parts formed explicitly,
    so that u == v gives an exactly real result."""
    re = u.real * v.real + u.imag * v.imag
    im = u.imag * v.real - u.real * v.imag
    return complex(_rsum(re), _rsum(im))


# -- public operators ---------------------------------------------------------


def apply_delta2(u: Field) -> Field:
    """Discrete Laplacian delta_x^2 + delta_y^2; boundary nodes of the result are zero."""
    g = u.grid
    out = np.zeros(g.shape, dtype=complex)
    out[1:-1, 1:-1] = laplacian_interior(u.values, g.dx, g.dy)
    return Field(g, out)


def apply_delta_plus(u: Field) -> Tuple[np.ndarray, np.ndarray]:
    """Forward differences: GradX has shape (J, K+1), GradY has shape (J+1, K)."""
    g = u.grid
    v = u.values
    return (v[1:, :] - v[:-1, :]) / g.dx, (v[:, 1:] - v[:, :-1]) / g.dy


def inner_h(u: Field, v: Field, interior: bool = False) -> complex:
    """(u, v)_h summed over j, k = 0..J-1, 0..K-1, or <u, v>_h over 1..J-1, 1..K-1."""
    g = _same_grid(u, v)
    if interior:
        s = _cdot_sum(u.values[1:-1, 1:-1], v.values[1:-1, 1:-1])
    else:
        s = _cdot_sum(u.values[:-1, :-1], v.values[:-1, :-1])
    return g.dx * g.dy * s


def grad_inner_h(u: Field, v: Field, axis: Union[str, None] = None) -> complex:
    """(delta^+ u, delta^+ v)_h, or a single direction with axis='x' / 'y'."""
    g = _same_grid(u, v)
    ux, uy = apply_delta_plus(u)
    vx, vy = apply_delta_plus(v)
    sx = _cdot_sum(ux[:, :-1], vx[:, :-1])
    sy = _cdot_sum(uy[:-1, :], vy[:-1, :])
    if axis == "x":
        return g.dx * g.dy * sx
    if axis == "y":
        return g.dx * g.dy * sy
    return g.dx * g.dy * (sx + sy)


def norm(u: Field, which: Union[int, str] = 2) -> float:
    """Discrete norm: which = 2, 4, 6, 8 (p-norms), 'inf' (sup over all nodes), 'grad'.

    Returns the norm itself, e.g. norm(u, 4)**4 is the quartic sum and
    norm(u, 'grad')**2 is the discrete H1 seminorm squared.
    """
    g = u.grid
    if which == "inf":
        return float(np.max(np.abs(u.values)))
    if which == "grad":
        gx, gy = apply_delta_plus(u)
        s = _rsum(np.abs(gx[:, :-1]) ** 2) + _rsum(np.abs(gy[:-1, :]) ** 2)
        return float(np.sqrt(g.dx * g.dy * s))
    if which in (2, 4, 6, 8):
        p = int(which)
        s = _rsum(np.abs(u.values[:-1, :-1]) ** p)
        return float((g.dx * g.dy * s) ** (1.0 / p))
    raise ValueError(f"unsupported norm {which!r}")


def norm_pow(u: Field, which: Union[int, str]) -> float:
    """norm(u, p)**p (or squared for 'grad') without the root/power round trip."""
    g = u.grid
    if which == "grad":
        gx, gy = apply_delta_plus(u)
        return g.dx * g.dy * (_rsum(np.abs(gx[:, :-1]) ** 2) + _rsum(np.abs(gy[:-1, :]) ** 2))
    if which in (2, 4, 6, 8):
        return g.dx * g.dy * _rsum(np.abs(u.values[:-1, :-1]) ** int(which))
    raise ValueError(f"unsupported norm {which!r}")


def mass(u: Field) -> float:
    """Discrete mass ||u||_{2,h}^2."""
    return norm_pow(u, 2)
