"""Lambert-W and Gauss-Jacobi quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SymTridiagonal, sym_tridiag_eigen


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the weight ``(1 - x)**a * (1 + x)**b`` on (-1, 1)."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > -1 and self.b > -1):
            raise ValueError(f"Jacobi exponents must exceed -1, got a={self.a}, b={self.b}")

    def log_mass(self) -> float:
        """log of the total weight mass 2**(a+b+1) * B(a+1, b+1)."""
        a, b = self.a, self.b
        return (a + b + 1) * math.log(2.0) + math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 2)

    def mass(self) -> float:
        return math.exp(self.log_mass())


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def lambert_w(x: float) -> float:
    """Principal branch of the Lambert-W function for ``x >= 0``.

    Halley iteration on ``w e^w - x`` started from ``log(1 + x)``.
    """
    x = float(x)
    if not x >= 0.0:
        raise ValueError(f"lambert_w is only defined here for x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = math.log1p(x)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new == w or abs(step) <= 4 * np.finfo(float).eps * abs(w_new):
            w = w_new
            break
        w = w_new
    # pick the float neighbour with the smallest residual
    best, best_r = w, abs(w * math.exp(w) - x)
    for cand in (math.nextafter(w, -math.inf), math.nextafter(w, math.inf)):
        r = abs(cand * math.exp(cand) - x)
        if r < best_r:
            best, best_r = cand, r
    return best


def _jacobi_recurrence(k: int, p: JacobiParams):
    """Diagonal and off-diagonal of the k x k Golub-Welsch matrix."""
    a, b = p.a, p.b
    j = np.arange(k, dtype=float)
    s = 2 * j + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    if k == 1:
        return diag, np.zeros(0)
    j = np.arange(1, k, dtype=float)
    s = 2 * j + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = 4 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1) * (s - 1))
    # j = 1 with a + b = -1 is a removable 0/0
    beta[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(beta)


def gauss_jacobi(k: int, p: JacobiParams) -> QuadratureRule:
    """k-point Gauss-Jacobi rule via Golub-Welsch."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    diag, off = _jacobi_recurrence(k, p)
    nodes, first = sym_tridiag_eigen(SymTridiagonal(diag, off), want_vectors=True)
    weights = p.mass() * first**2
    return QuadratureRule(nodes, weights)


def jacobi_zeros(m: int, p: JacobiParams) -> np.ndarray:
    """Zeros of the degree-m Jacobi polynomial, ascending."""
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    if m == 0:
        return np.zeros(0)
    return gauss_jacobi(m, p).nodes
