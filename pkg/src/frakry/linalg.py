"""Dense and banded linear algebra kernels.

Small symmetric eigenproblems (Golub-Welsch matrices, projected Krylov
matrices of order <= 40) are handled by a self-contained implicit QL
iteration.  Large banded SPD systems go through LAPACK's banded Cholesky.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

EPS = np.finfo(float).eps
MAX_SWEEPS = 50


class NotSpdError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, pivot: int, msg: str | None = None):
        self.pivot = pivot
        super().__init__(msg or f"matrix is not positive definite (pivot {pivot})")


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SymTridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).ravel()
        e = np.asarray(self.offdiag, dtype=float).ravel()
        if len(d) == 0 or len(e) != len(d) - 1:
            raise ValueError(f"inconsistent lengths: diag={len(d)}, offdiag={len(e)}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("non-finite entries")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return len(self.diag)

    def todense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def norm(self) -> float:
        """Cheap upper bound on the 2-norm (max absolute row sum)."""
        r = np.abs(self.diag).copy()
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        return float(r.max())


def _tql(d, e, z=None):
    """Implicit QL with Wilkinson shifts, in place on ``d`` (diagonal) and
    ``e`` (subdiagonal padded to length n, e[-1] = 0).  When ``z`` is given
    its columns are rotated along with the iteration; pass the identity to
    get eigenvectors, or an orthogonal matrix to accumulate onto it.
    """
    n = len(d)
    d_out = d
    # power-of-two rescale to O(1): the deflation test fails on subnormals
    top = max(np.abs(d).max(), np.abs(e).max())
    if top == 0.0:
        return d_out, z
    shift = -math.frexp(top)[1]
    d = [math.ldexp(float(x), shift) for x in d]
    e = [math.ldexp(float(x), shift) for x in e]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == MAX_SWEEPS:
                raise ConvergenceError(f"QL iteration did not converge for eigenvalue {l}")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    d_out[:] = [math.ldexp(x, -shift) for x in d]
    return d_out, z


def sym_tridiag_eigen(T: SymTridiagonal, want_vectors: bool = False):
    """Eigenvalues (ascending) of a symmetric tridiagonal matrix.

    Returns ``(eigenvalues, first_components)`` where ``first_components`` is
    the first entry of each normalized eigenvector (``None`` unless
    ``want_vectors``).  Only the first row of the eigenvector matrix is
    tracked, which is all Golub-Welsch needs.
    """
    d = T.diag.copy()
    e = np.zeros(T.n)
    e[:-1] = T.offdiag
    z = np.eye(T.n)[:1, :] if want_vectors else None
    d, z = _tql(d, e, z)
    order = np.argsort(d, kind="stable")
    first = None
    if want_vectors:
        first = z[0, order]
        # sign convention: first component nonnegative
        first = np.abs(first)
    return d[order], first


def _householder_tridiagonalize(B):
    """Reduce symmetric ``B`` to tridiagonal form ``Q^T B Q``.

    Returns diag, offdiag, Q.
    """
    a = np.array(B, dtype=float, copy=True)
    n = a.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        # two-sided reflection on the trailing block
        sub = a[k + 1:, k:]
        sub -= 2.0 * np.outer(v, v @ sub)
        a[k + 1:, k:] = sub
        sub = a[k:, k + 1:]
        sub -= 2.0 * np.outer(sub @ v, v)
        a[k:, k + 1:] = sub
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v)
    return np.diag(a).copy(), np.diag(a, -1).copy(), Q


def dense_sym_eigen(B):
    """Full eigendecomposition ``B = Q diag(w) Q^T`` of a symmetric matrix.

    Householder tridiagonalization followed by implicit QL with the
    eigenvectors accumulated onto the Householder basis.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ValueError("non-finite entries")
    n = B.shape[0]
    scale = np.abs(B).max() if n else 0.0
    if n and np.abs(B - B.T).max() > 1e-12 * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric; symmetrize before calling")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    d, off, Q = _householder_tridiagonalize(B)
    e = np.zeros(n)
    e[:-1] = off
    d, Q = _tql(d, e, Q)
    order = np.argsort(d, kind="stable")
    return d[order], Q[:, order]


@dataclass
class BandedSpd:
    """Symmetric banded matrix stored by its lower bands.

    ``bands[i, j]`` holds ``M[j + i, j]`` (LAPACK lower storage), so row 0 is
    the diagonal and row ``b`` the outermost subdiagonal.
    """

    bands: np.ndarray
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        self.bands = np.atleast_2d(np.asarray(self.bands, dtype=float))
        if not np.all(np.isfinite(self.bands)):
            raise ValueError("non-finite band entries")

    @classmethod
    def from_dense(cls, M, bandwidth: int | None = None) -> "BandedSpd":
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        if bandwidth is None:
            nz = np.nonzero(np.tril(M))
            bandwidth = int((nz[0] - nz[1]).max()) if len(nz[0]) else 0
        bands = np.zeros((bandwidth + 1, n))
        for i in range(bandwidth + 1):
            bands[i, : n - i] = np.diag(M, -i)
        return cls(bands)

    @property
    def n(self) -> int:
        return self.bands.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.bands.shape[0] - 1

    def todense(self) -> np.ndarray:
        M = np.diag(self.bands[0])
        for i in range(1, self.bandwidth + 1):
            off = np.diag(self.bands[i, : self.n - i], -i)
            M = M + off + off.T
        return M

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.bands[0] * x
        for i in range(1, self.bandwidth + 1):
            b = self.bands[i, : self.n - i]
            y[i:] += b * x[:-i]
            y[:-i] += b * x[i:]
        return y

    def factor(self) -> np.ndarray:
        """Cached lower banded Cholesky factor."""
        with self._lock:
            if self._chol is None:
                try:
                    self._chol = sla.cholesky_banded(self.bands, lower=True)
                except np.linalg.LinAlgError as exc:
                    m = re.search(r"(\d+)", str(exc))
                    pivot = int(m.group(1)) - 1 if m else -1
                    raise NotSpdError(pivot) from exc
            return self._chol


def banded_cholesky_solve(M: BandedSpd, rhs) -> np.ndarray:
    """Solve ``M x = rhs`` for banded SPD ``M``; the factor is cached on ``M``."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != M.n:
        raise ValueError(f"rhs has length {rhs.shape[0]}, expected {M.n}")
    return sla.cho_solve_banded((M.factor(), True), rhs, check_finite=False)


def modified_gram_schmidt_step(V, w, tol: float = 1e-14):
    """Orthogonalize ``w`` against the orthonormal columns of ``V``.

    Two MGS passes are always made.  Returns ``(h, h_next, v_next)`` with
    ``w = V h + h_next v_next``.  On breakdown (remainder below
    ``tol * ||w||``, i.e. ``w`` lies in the span of ``V``) ``v_next`` is None.
    """
    w = np.array(w, dtype=float, copy=True)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    wnorm = sla.norm(w)  # BLAS nrm2: no underflow for tiny w
    m = V.shape[1]
    h = np.zeros(m)
    for _ in range(2):
        for i in range(m):
            c = V[:, i] @ w
            w -= c * V[:, i]
            h[i] += c
    h_next = float(sla.norm(w))
    if h_next <= tol * wnorm:
        return h, h_next, None
    return h, h_next, w / h_next
