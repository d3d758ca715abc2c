"""Finite-difference Laplacian on the unit interval/square (homogeneous
Dirichlet) and the exact spectral oracle in the discrete sine basis."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .krylov import SpdOperator
from .linalg import BandedSpd
from .poles import TargetFunction


class Rhs(str, enum.Enum):
    SIN1D = "sin1d"
    SIN2D = "sin2d"
    POLY_BUMP2D = "polybump2d"
    ALLEN_CAHN_INIT2D = "allencahninit2d"


@dataclass(frozen=True)
class GridProblem:
    """Interior grid of the unit interval (dimension 1) or unit square.

    2D vectors are stored with x varying fastest: ``u[j * nx + i]`` is the
    value at ``(x_i, y_j)``.
    """

    dimension: int
    nx: int
    ny: int = 1
    alpha: float = 1.5

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid sizes must be >= 1")
        if self.dimension == 1 and self.ny != 1:
            raise ValueError("1D problems have ny = 1")
        if not 1 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")

    @classmethod
    def line(cls, nx: int, alpha: float = 1.5) -> "GridProblem":
        return cls(1, nx, 1, alpha)

    @classmethod
    def square(cls, nx: int, ny: int | None = None, alpha: float = 1.5) -> "GridProblem":
        return cls(2, nx, nx if ny is None else ny, alpha)

    @property
    def n(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return 1.0 / (self.nx + 1)

    @property
    def hy(self) -> float:
        return 1.0 / (self.ny + 1)

    def nodes(self):
        """Interior coordinates: x (1D) or the pair of 1D axes (2D)."""
        x = np.arange(1, self.nx + 1) * self.hx
        if self.dimension == 1:
            return x
        return x, np.arange(1, self.ny + 1) * self.hy


def eigenvalues_1d(m: int) -> np.ndarray:
    """Eigenvalues 4 sin^2(j pi h / 2) / h^2, j = 1..m, of tridiag(-1, 2, -1)/h^2."""
    h = 1.0 / (m + 1)
    return 4.0 * np.sin(np.arange(1, m + 1) * np.pi * h / 2) ** 2 / h**2


class FdLaplacian(SpdOperator):
    """Negative FD Laplacian, ``tridiag(-1, 2, -1)/h^2`` or its Kronecker sum."""

    def __init__(self, gp: GridProblem):
        super().__init__()
        self.gp = gp
        self.n = gp.n
        self.lam_x = eigenvalues_1d(gp.nx)
        self.lam_y = eigenvalues_1d(gp.ny) if gp.dimension == 2 else None
        if gp.dimension == 1:
            self.lambda_min = float(self.lam_x[0])
            self.lambda_max = float(self.lam_x[-1])
        else:
            self.lambda_min = float(self.lam_x[0] + self.lam_y[0])
            self.lambda_max = float(self.lam_x[-1] + self.lam_y[-1])

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues, laid out like grid vectors."""
        if self.gp.dimension == 1:
            return self.lam_x.copy()
        return (self.lam_y[:, None] + self.lam_x[None, :]).ravel()

    def matvec(self, x):
        gp = self.gp
        x = np.asarray(x, dtype=float)
        if gp.dimension == 1:
            y = 2.0 * x
            y[1:] -= x[:-1]
            y[:-1] -= x[1:]
            return y / gp.hx**2
        u = x.reshape(gp.ny, gp.nx)
        y = (2.0 / gp.hx**2 + 2.0 / gp.hy**2) * u
        y[:, 1:] -= u[:, :-1] / gp.hx**2
        y[:, :-1] -= u[:, 1:] / gp.hx**2
        y[1:, :] -= u[:-1, :] / gp.hy**2
        y[:-1, :] -= u[1:, :] / gp.hy**2
        return y.ravel()

    def _factor(self, xi):
        return self.banded(xi)

    def banded(self, xi: float = 0.0) -> BandedSpd:
        """``xi I + A`` in lower band storage (bandwidth 1 in 1D, nx in 2D)."""
        gp = self.gp
        n = gp.n
        if gp.dimension == 1:
            bands = np.zeros((2, n))
            bands[0] = xi + 2.0 / gp.hx**2
            bands[1, :-1] = -1.0 / gp.hx**2
            return BandedSpd(bands)
        b = gp.nx
        bands = np.zeros((b + 1, n))
        bands[0] = xi + 2.0 / gp.hx**2 + 2.0 / gp.hy**2
        sub = np.full(n, -1.0 / gp.hx**2)
        sub[gp.nx - 1 :: gp.nx] = 0.0  # no coupling across grid rows
        if b == 1:
            bands[1, :-1] = sub[:-1] - 1.0 / gp.hy**2
            return BandedSpd(bands)
        bands[1, :-1] = sub[:-1]
        bands[b, : n - b] = -1.0 / gp.hy**2
        return BandedSpd(bands)

    def todense(self) -> np.ndarray:
        return np.column_stack([self.matvec(e) for e in np.eye(self.n)])


def fd_laplacian(gp: GridProblem) -> FdLaplacian:
    return FdLaplacian(gp)


def _dst(u, axis):
    # DST-I with orthonormal scaling is exactly the symmetric orthogonal
    # matrix sqrt(2h) sin(i j pi h), so it is its own inverse.
    return scipy.fft.dst(u, type=1, norm="ortho", axis=axis)


def spectral_oracle_apply(gp: GridProblem, f, v) -> np.ndarray:
    """Exact ``f(A) v`` via the discrete sine eigenbasis of the FD Laplacian.

    ``f`` is a :class:`TargetFunction`, any callable on eigenvalue arrays,
    or a number ``p`` meaning ``z**p``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (gp.n,):
        raise ValueError(f"vector has shape {v.shape}, grid has {gp.n} unknowns")
    if isinstance(f, (int, float)) and not isinstance(f, bool):
        p = float(f)
        fn = lambda z: z**p  # noqa: E731
    elif isinstance(f, TargetFunction) or callable(f):
        fn = f
    else:
        raise TypeError(f"cannot interpret {f!r} as a scalar function")
    lam_x = eigenvalues_1d(gp.nx)
    if gp.dimension == 1:
        return _dst(fn(lam_x) * _dst(v, 0), 0)
    lam = eigenvalues_1d(gp.ny)[:, None] + lam_x[None, :]
    c = _dst(_dst(v.reshape(gp.ny, gp.nx), 1), 0)
    return _dst(_dst(fn(lam) * c, 0), 1).ravel()


def sample_rhs(gp: GridProblem, expr: Rhs | str) -> np.ndarray:
    expr = Rhs(expr)
    if expr is Rhs.SIN1D:
        if gp.dimension != 1:
            raise ValueError(f"{expr.value} needs a 1D grid")
        return np.sin(np.pi * gp.nodes())
    if gp.dimension != 2:
        raise ValueError(f"{expr.value} needs a 2D grid")
    x, y = gp.nodes()
    X, Y = np.meshgrid(x, y)  # rows follow y, so ravel() is x-fastest
    if expr is Rhs.SIN2D:
        u = np.sin(np.pi * X) * np.sin(np.pi * Y)
    elif expr is Rhs.POLY_BUMP2D:
        u = X**2 * Y**2 * (1 - X) * (1 - Y)
    else:
        u = 0.25 * np.sin(2 * np.pi * X) * np.sin(2 * np.pi * Y)
    return u.ravel()
