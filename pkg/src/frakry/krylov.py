"""Krylov bases and projection-based evaluation of f(A) v for SPD A.

Four subspaces are supported:

* ``jacobi`` -- rational Krylov with poles from :mod:`frakry.poles`
* ``poly`` -- polynomial Krylov (Lanczos with full reorthogonalization)
* ``extended`` -- alternating A^{-1} and A directions
* ``shiftinvert`` -- rational Krylov with the single repeated pole
  sqrt(lambda_min * lambda_max)

All of them approximate ``f(A) v ~ beta V f(V^T A V) e_1``.
"""

from __future__ import annotations

import enum
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import BandedSpd, banded_cholesky_solve, dense_sym_eigen, modified_gram_schmidt_step
from .poles import PoleSet, TargetFunction, make_pole_set


class SpectralLeakError(RuntimeError):
    """A Ritz value fell outside the operator's declared spectral interval."""


class Method(str, enum.Enum):
    JACOBI = "jacobi"
    POLY = "poly"
    EXTENDED = "extended"
    SHIFTINVERT = "shiftinvert"


class SpdOperator:
    """Symmetric positive definite operator with known spectral bounds.

    Subclasses provide ``matvec`` and ``_factor(xi)`` returning a
    :class:`BandedSpd` for ``xi I + A``; factorizations are cached per shift.
    """

    n: int
    lambda_min: float
    lambda_max: float
    symmetric = True

    def __init__(self):
        self._factors: dict[float, BandedSpd] = {}
        self._lock = threading.Lock()
        self.n_solves = 0

    def matvec(self, x) -> np.ndarray:
        raise NotImplementedError

    def _factor(self, xi: float) -> BandedSpd:
        raise NotImplementedError

    def shifted(self, xi: float) -> BandedSpd:
        xi = float(xi)
        with self._lock:
            M = self._factors.get(xi)
            if M is None:
                M = self._factor(xi)
                self._factors[xi] = M
        return M

    def solve_shifted(self, xi: float, b) -> np.ndarray:
        """Solve ``(xi I + A) x = b`` for ``xi >= 0``."""
        if xi < 0:
            raise ValueError(f"shift must be nonnegative, got {xi}")
        self.n_solves += 1
        return banded_cholesky_solve(self.shifted(xi), b)

    def clear_cache(self):
        with self._lock:
            self._factors.clear()


class DenseSpd(SpdOperator):
    """Small dense SPD matrix; bounds default to its exact extreme eigenvalues."""

    def __init__(self, M, lambda_min: float | None = None, lambda_max: float | None = None):
        super().__init__()
        self.M = np.asarray(M, dtype=float)
        self.n = self.M.shape[0]
        if lambda_min is None or lambda_max is None:
            w = np.linalg.eigvalsh(self.M)
            lambda_min = w[0] if lambda_min is None else lambda_min
            lambda_max = w[-1] if lambda_max is None else lambda_max
        self.lambda_min, self.lambda_max = float(lambda_min), float(lambda_max)

    def matvec(self, x):
        return self.M @ x

    def _factor(self, xi):
        return BandedSpd.from_dense(self.M + xi * np.eye(self.n), bandwidth=self.n - 1)


@dataclass
class KrylovBasis:
    """Orthonormal basis ``V`` (n x m) with its recurrence coefficients.

    ``H[:, j]`` holds the coefficients of the j-th new direction against
    the basis vectors available at that step.  For rational methods the
    direction is ``(xi_j I + A)^{-1} v_j``, ``poles[j] = xi_j`` and one
    extra vector ``v_next`` is kept so that the Arnoldi-like
    decomposition can be formed at dimension m.
    """

    V: np.ndarray
    H: np.ndarray
    method: Method
    beta: float
    poles: np.ndarray | None = None
    v_next: np.ndarray | None = None
    exact: bool = False

    @property
    def m(self) -> int:
        return self.V.shape[1]

    @property
    def D(self) -> np.ndarray:
        """diag(1 / xi_j), the pole diagonal in its inverse-pole form."""
        return np.diag(1.0 / self.poles[: self.m])


def _seed(v):
    v = np.asarray(v, dtype=float)
    beta = float(np.linalg.norm(v))
    if beta == 0.0 or not np.isfinite(beta):
        raise ValueError("seed vector must be nonzero and finite")
    return v / beta, beta


def rational_arnoldi(A: SpdOperator, v, poles, method: Method = Method.JACOBI) -> KrylovBasis:
    """Rational Arnoldi with poles ``xi_j > 0`` applied in the given order.

    ``len(poles) = k`` shifted solves are made; the returned basis has
    dimension ``m = k`` (or less on breakdown, in which case the span is
    invariant and ``exact`` is set).
    """
    xi = np.asarray(poles.xi if isinstance(poles, PoleSet) else poles, dtype=float)
    k = len(xi)
    if k < 1:
        raise ValueError("need at least one pole")
    v1, beta = _seed(v)
    V = np.zeros((A.n, k + 1))
    H = np.zeros((k + 1, k))
    V[:, 0] = v1
    for j in range(k):
        w = A.solve_shifted(xi[j], V[:, j])
        h, h_next, v_next = modified_gram_schmidt_step(V[:, : j + 1], w)
        H[: j + 1, j] = h
        H[j + 1, j] = h_next
        if v_next is None:
            m = j + 1
            return KrylovBasis(V[:, :m].copy(), H[: m + 1, :m].copy(), method, beta, xi[:m].copy(), None, True)
        V[:, j + 1] = v_next
    return KrylovBasis(V[:, :k].copy(), H, method, beta, xi, V[:, k].copy(), False)


def polynomial_krylov_basis(A: SpdOperator, v, k: int) -> KrylovBasis:
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    v1, beta = _seed(v)
    V = np.zeros((A.n, k))
    H = np.zeros((k, k - 1))
    V[:, 0] = v1
    for j in range(k - 1):
        w = A.matvec(V[:, j])
        h, h_next, v_next = modified_gram_schmidt_step(V[:, : j + 1], w)
        H[: j + 1, j] = h
        H[j + 1, j] = h_next
        if v_next is None:
            m = j + 1
            return KrylovBasis(V[:, :m].copy(), H[:m, :m].copy(), Method.POLY, beta, exact=True)
        V[:, j + 1] = v_next
    return KrylovBasis(V, H, Method.POLY, beta)


def extended_krylov_basis(A: SpdOperator, v, k: int) -> KrylovBasis:
    """span{v, A^-1 v, A v, A^-2 v, A^2 v, ...} of dimension k.

    Odd steps solve with A, even steps multiply by A, so floor(k/2) solves
    are made in total.
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    v1, beta = _seed(v)
    V = np.zeros((A.n, k))
    H = np.zeros((k, k - 1))
    V[:, 0] = v1
    last_inv = last_pos = 0
    for j in range(k - 1):
        if j % 2 == 0:
            w = A.solve_shifted(0.0, V[:, last_inv])
        else:
            w = A.matvec(V[:, last_pos])
        h, h_next, v_next = modified_gram_schmidt_step(V[:, : j + 1], w)
        H[: j + 1, j] = h
        H[j + 1, j] = h_next
        if v_next is None:
            # either branch closing up means the Laurent-Krylov space is invariant
            m = j + 1
            return KrylovBasis(V[:, :m].copy(), H[:m, :m].copy(), Method.EXTENDED, beta, exact=True)
        V[:, j + 1] = v_next
        if j % 2 == 0:
            last_inv = j + 1
        else:
            last_pos = j + 1
    return KrylovBasis(V, H, Method.EXTENDED, beta)


def shift_invert_pole(A: SpdOperator) -> float:
    return float(np.sqrt(A.lambda_min * A.lambda_max))


def shift_invert_basis(A: SpdOperator, v, k: int) -> KrylovBasis:
    """Rational basis with the repeated pole sigma = sqrt(lambda_min lambda_max).

    The resolvent used is ``(sigma I + A)^{-1}``.
    """
    return rational_arnoldi(A, v, np.full(k, shift_invert_pole(A)), method=Method.SHIFTINVERT)


def rational_closed_form(B: KrylovBasis, A: SpdOperator | None = None) -> np.ndarray:
    """Projected matrix recovered from the rational recurrence coefficients.

    From ``v_j = (xi_j I + A) V_{m+1} H[:, j]`` one gets

        V^T A V = (I - H_m X) H_m^{-1} - h_{m+1,m} (V^T A v_{m+1}) e_m^T H_m^{-1}

    with ``X = diag(xi_j)``.  The last term needs one product with ``A``
    and is skipped when ``A`` is None (it vanishes on breakdown).
    """
    m = B.m
    Hm = B.H[:m, :m]
    Hinv = np.linalg.inv(Hm)
    C = (np.eye(m) - Hm * B.poles[:m]) @ Hinv
    if A is not None and B.v_next is not None:
        u = B.V.T @ A.matvec(B.v_next)
        C -= B.H[m, m - 1] * np.outer(u, Hinv[m - 1])
    return C


def truncated_closed_form(B: KrylovBasis) -> np.ndarray:
    """``(I - H_m D_m) H_m^{-1}`` with ``D_m = diag(1/xi_j)`` and no
    residual term.  Kept for comparison only: it differs from ``V^T A V``
    in general (see :func:`rational_closed_form` for the exact identity)."""
    m = B.m
    Hm = B.H[:m, :m]
    return (np.eye(m) - Hm @ B.D) @ np.linalg.inv(Hm)


def projected_matrix(B: KrylovBasis, A: SpdOperator, check: bool = True) -> np.ndarray:
    """``V^T A V`` formed explicitly and symmetrized.

    For rational bases the result is cross-checked against
    :func:`rational_closed_form`; a mismatch only warns.
    """
    AV = np.column_stack([A.matvec(B.V[:, j]) for j in range(B.m)])
    S = B.V.T @ AV
    S = 0.5 * (S + S.T)
    if check and B.poles is not None:
        try:
            C = rational_closed_form(B, A)
        except np.linalg.LinAlgError:
            warnings.warn("H is singular; skipping closed-form cross-check", RuntimeWarning, stacklevel=2)
        else:
            err = np.abs(S - C).max()
            if err > 1e-8 * np.abs(S).max():
                warnings.warn(
                    f"projected matrix differs from the rational closed form by {err:.3e}",
                    RuntimeWarning,
                    stacklevel=2,
                )
    return S


def build_basis(A: SpdOperator, v, method: Method | str, k: int, poles=None) -> KrylovBasis:
    method = Method(method)
    if method is Method.JACOBI:
        if poles is None:
            raise ValueError("the jacobi method needs poles")
        return rational_arnoldi(A, v, poles)
    if method is Method.POLY:
        return polynomial_krylov_basis(A, v, k)
    if method is Method.EXTENDED:
        return extended_krylov_basis(A, v, k)
    return shift_invert_basis(A, v, k)


def apply_matrix_function(
    A: SpdOperator,
    v,
    target: TargetFunction,
    method: Method | str = Method.JACOBI,
    k: int = 10,
    poles: PoleSet | None = None,
    check: bool = False,
    return_basis: bool = False,
):
    """Approximate ``target(A) @ v`` from a k-dimensional Krylov subspace.

    For ``method="jacobi"`` the poles come from ``make_pole_set`` unless
    given.  A zero ``v`` maps to zero.
    """
    method = Method(method)
    v = np.asarray(v, dtype=float)
    if v.shape != (A.n,):
        raise ValueError(f"vector has shape {v.shape}, operator has order {A.n}")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if not np.any(v):
        return (np.zeros_like(v), None) if return_basis else np.zeros_like(v)
    if method is Method.JACOBI and poles is None:
        poles = make_pole_set(target, k, A.lambda_min, A.lambda_max)
    B = build_basis(A, v, method, k, poles)
    S = projected_matrix(B, A, check=check)
    lam, Q = dense_sym_eigen(S)
    lo, hi = A.lambda_min * (1 - 1e-8), A.lambda_max * (1 + 1e-8)
    if lam[0] < lo or lam[-1] > hi:
        raise SpectralLeakError(
            f"Ritz values [{lam[0]:.6e}, {lam[-1]:.6e}] outside [{A.lambda_min:.6e}, {A.lambda_max:.6e}]"
        )
    y = B.beta * (B.V @ (Q @ (target(lam) * Q[0])))
    return (y, B) if return_basis else y
