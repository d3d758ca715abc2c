"""Rational approximation of ``z**(-alpha/2)`` and the Krylov pole sets
derived from it.

The approximant is ``R(z) = chi * prod(z + eps_r) / prod(z + eta_j)``, built
from Gauss-Jacobi data.  For the fractional resolvent
``(1 + nu z**(alpha/2))**-1`` the poles are the negated roots of
``p(z) + nu q(z)``, which interlacing makes real, simple and negative; they
are isolated by sign brackets and never expanded into monomial
coefficients.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .special import JacobiParams, gauss_jacobi, jacobi_zeros, lambert_w


class NotFractionalError(ValueError):
    """alpha == 2: the classical resolvent needs no rational approximation."""


class InternalConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class TargetFunction:
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")

    def __call__(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class InverseFracPower(TargetFunction):
    """z -> z**(-alpha/2)"""

    def __call__(self, z):
        return np.asarray(z, dtype=float) ** (-self.alpha / 2)


@dataclass(frozen=True)
class FracResolvent(TargetFunction):
    """z -> 1 / (1 + nu * z**(alpha/2))"""

    nu: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    def __call__(self, z):
        return 1.0 / (1.0 + self.nu * np.asarray(z, dtype=float) ** (self.alpha / 2))


@dataclass(frozen=True)
class TauSelection:
    lambda_min: float
    lambda_max: float
    k: int
    k_bar: float
    sigma_tilde: float
    tau_tilde: float
    tau: float


@dataclass(frozen=True, eq=False)
class FracPowerRational:
    """``R(z) = chi * prod(z + eps) / prod(z + eta)``.

    ``eta`` (length k) and ``eps`` (length k-1) are stored in decreasing
    order so that ``eta[0] > eps[0] > eta[1] > ... > eps[-1] > eta[-1] > 0``.
    ``theta``/``omega`` are the Gauss-Jacobi nodes/weights (ascending nodes,
    so ``eta[j]`` comes from ``theta[j]``).
    """

    alpha: float
    k: int
    tau: float
    eps: np.ndarray
    eta: np.ndarray
    chi: float
    theta: np.ndarray
    omega: np.ndarray

    def __call__(self, z):
        return evaluate_rational(self, z)

    def partial_fraction(self, z):
        """Same function evaluated as a sum of simple fractions."""
        a2 = self.alpha / 2
        z = np.asarray(z, dtype=float)
        c = 2 * math.sin(a2 * math.pi) * self.tau ** (1 - a2) / math.pi * self.omega / (1 + self.theta)
        return np.sum(c / (self.eta + z[..., None]), axis=-1)

    def log_p(self, z):
        """(sign, log|p(z)|) of the numerator at real z."""
        d = np.asarray(z, dtype=float)[..., None] + self.eps
        with np.errstate(divide="ignore"):
            return np.prod(np.sign(d), axis=-1), math.log(self.chi) + np.sum(np.log(np.abs(d)), axis=-1)

    def log_q(self, z):
        """(sign, log|q(z)|) of the denominator at real z."""
        d = np.asarray(z, dtype=float)[..., None] + self.eta
        with np.errstate(divide="ignore"):
            return np.prod(np.sign(d), axis=-1), np.sum(np.log(np.abs(d)), axis=-1)


@dataclass(frozen=True, eq=False)
class PoleSet:
    target: TargetFunction
    xi: np.ndarray
    rational: FracPowerRational
    tau_selection: TauSelection
    tau: float = field(default=0.0)

    def __len__(self):
        return len(self.xi)


def _check_alpha(alpha):
    if alpha == 2:
        raise NotFractionalError("alpha = 2 is the classical case; solve with (xi I + A) directly")
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2) for the rational construction, got {alpha}")


def select_tau(alpha: float, k: int, lambda_min: float, lambda_max: float) -> TauSelection:
    _check_alpha(alpha)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if not 0 < lambda_min <= lambda_max:
        raise ValueError(f"need 0 < lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]")
    a2 = alpha / 2
    kappa = lambda_max / lambda_min
    log_kappa = math.log(kappa)
    k_bar = a2**2 / 8 * math.sqrt(kappa) * (log_kappa + 2)
    w = lambert_w(4 * k * k * math.e / a2**2)
    tau_tilde = lambda_min * (alpha / (4 * k * math.e)) ** 2 * math.exp(2 * w)
    sigma_tilde = -a2 / (8 * k) * log_kappa * math.sqrt(lambda_max)
    if k <= k_bar:
        tau = tau_tilde
    else:
        tau = (sigma_tilde + math.sqrt(sigma_tilde**2 + math.sqrt(lambda_min * lambda_max))) ** 2
    return TauSelection(lambda_min, lambda_max, k, k_bar, sigma_tilde, tau_tilde, tau)


def _log_binom(x: float, m: int) -> float:
    """log of the generalized binomial C(x, m) for x > m - 1."""
    return math.lgamma(x + 1) - math.lgamma(m + 1) - math.lgamma(x - m + 1)


def build_frac_power_rational(alpha: float, k: int, tau: float) -> FracPowerRational:
    _check_alpha(alpha)
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    a2 = alpha / 2
    rule = gauss_jacobi(k, JacobiParams(-a2, a2 - 1))
    theta, omega = rule.nodes, rule.weights
    zeta = jacobi_zeros(k - 1, JacobiParams(a2, 1 - a2))
    eta = tau * (1 - theta) / (1 + theta)
    eps = tau * (1 - zeta) / (1 + zeta)
    log_chi = (
        math.log(eta[-1])
        - a2 * math.log(tau)
        + _log_binom(k + a2 - 1, k - 1)
        - _log_binom(k - a2, k)
        + float(np.sum(np.log(eta[:-1]) - np.log(eps)))
    )
    chi = math.exp(log_chi)
    merged = np.empty(2 * k - 1)
    merged[0::2] = eta
    merged[1::2] = eps
    if not (np.all(np.diff(merged) < 0) and merged[-1] > 0 and chi > 0):
        raise InternalConsistencyError(
            f"interlacing violated for alpha={alpha}, k={k}, tau={tau}: eta={eta}, eps={eps}"
        )
    return FracPowerRational(alpha, k, tau, eps, eta, chi, theta, omega)


def evaluate_rational(R: FracPowerRational, z):
    """R(z) for z >= 0, via sums of logs (no overflow for large k, z)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(~np.isfinite(z)):
        raise ValueError("evaluate_rational needs finite z >= 0")
    _, lp = R.log_p(z)
    _, lq = R.log_q(z)
    return np.exp(lp - lq)


def _qtilde(R: FracPowerRational, nu: float, z):
    """Scaled value and derivative of ``p(z) + nu q(z)`` at real ``z``
    (scalar or array).

    Returns ``(val, dval, m)`` with the true value ``val * exp(m)``; the
    scaling keeps both terms representable when ``k`` and ``|z|`` are large.
    """
    z = np.asarray(z, dtype=float)
    sp, lp = R.log_p(z)
    sq, lq = R.log_q(z)
    lq = lq + math.log(nu)
    m = np.maximum(lp, lq)
    with np.errstate(divide="ignore", invalid="ignore"):
        tp = np.where(lp > -np.inf, sp * np.exp(lp - m), 0.0)
        tq = np.where(lq > -np.inf, sq * np.exp(lq - m), 0.0)
        ip = np.sum(1.0 / (z[..., None] + R.eps), axis=-1)
        iq = np.sum(1.0 / (z[..., None] + R.eta), axis=-1)
        dp = np.where(tp != 0, tp * ip, 0.0)
        dq = np.where(tq != 0, tq * iq, 0.0)
    return tp + tq, dp + dq, m


def _sign_qt(R, nu, x):
    """sign of q~(-x); the value-only path of :func:`_qtilde`."""
    z = -np.asarray(x, dtype=float)
    dp = z[..., None] + R.eps
    dq = z[..., None] + R.eta
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = math.log(R.chi) + np.log(np.abs(dp)).sum(axis=-1)
        lq = math.log(nu) + np.log(np.abs(dq)).sum(axis=-1)
        m = np.maximum(lp, lq)
        tp = np.where(lp > -np.inf, np.sign(dp).prod(axis=-1) * np.exp(lp - m), 0.0)
        tq = np.where(lq > -np.inf, np.sign(dq).prod(axis=-1) * np.exp(lq - m), 0.0)
    return np.sign(tp + tq)


def resolvent_denominator_roots(R: FracPowerRational, nu: float) -> np.ndarray:
    """Negated roots of ``p(z) + nu q(z)``, ascending and positive.

    ``q~(-eta_j) = p(-eta_j)`` alternates in sign, giving one root between
    consecutive ``eta`` and one beyond ``eta[0]``.  All k brackets are
    bisected together, then polished by two guarded Newton steps.
    """
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    k = R.k
    if k == 1:
        return np.array([R.eta[0] + R.chi / nu])
    eta = R.eta
    lead = (-1) ** k
    L = 2 * eta[0]
    for _ in range(2000):
        if _sign_qt(R, nu, L) == lead:
            break
        L *= 2
    else:
        raise InternalConsistencyError("could not bracket the outermost root")
    points = np.concatenate([[L], eta])
    signs = _sign_qt(R, nu, points)
    changes = int(np.sum(signs[:-1] * signs[1:] < 0))
    if changes != k or np.any(signs == 0):
        raise InternalConsistencyError(
            f"expected {k} sign changes, found {changes}; points={points.tolist()}, signs={signs.tolist()}"
        )
    hi = points[:-1].copy()
    lo = points[1:].copy()
    s_lo = signs[1:]
    for _ in range(400):
        active = hi - lo > 1e-14 * hi
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        s = _sign_qt(R, nu, mid)
        exact = active & (s == 0)
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
        move_lo = active & (s == s_lo)
        move_hi = active & (s != s_lo) & (s != 0)
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_hi, mid, hi)
    x = 0.5 * (lo + hi)
    for _ in range(2):
        val, dval, m = _qtilde(R, nu, -x)
        with np.errstate(divide="ignore", invalid="ignore"):
            # d/dx q~(-x) = -q~'(-x)
            x_new = x + val / dval
        ok = np.isfinite(x_new) & (lo <= x_new) & (x_new <= hi)
        val_new, _, m_new = _qtilde(R, nu, -np.where(ok, x_new, x))
        with np.errstate(divide="ignore"):
            better = ok & (np.log(np.abs(val_new)) + m_new <= np.log(np.abs(val)) + m)
        x = np.where(better, x_new, x)
    return np.sort(x)


@functools.lru_cache(maxsize=256)
def make_pole_set(target: TargetFunction, k: int, lambda_min: float, lambda_max: float, tau: float | None = None) -> PoleSet:
    """Poles for the rational Krylov method; ``tau`` overrides the selected scale."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    _check_alpha(target.alpha)
    sel = select_tau(target.alpha, k, lambda_min, lambda_max)
    tau_used = sel.tau if tau is None else float(tau)
    R = build_frac_power_rational(target.alpha, k, tau_used)
    if isinstance(target, FracResolvent):
        xi = resolvent_denominator_roots(R, target.nu)
    elif isinstance(target, InverseFracPower):
        xi = np.sort(R.eta)
    else:
        raise TypeError(f"unsupported target {target!r}")
    if not np.all(xi > 0):
        raise InternalConsistencyError(f"non-positive poles: {xi}")
    if k > 1 and np.min(np.diff(xi)) <= 1e-12 * xi[-1]:
        raise InternalConsistencyError(f"poles not distinct: {xi}")
    xi.setflags(write=False)
    return PoleSet(target, xi, R, sel, tau_used)
