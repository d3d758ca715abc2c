import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import lambert_w_bisect, qtilde_sign

from frakry.discretize import eigenvalues_1d
from frakry.poles import (
    FracResolvent,
    InverseFracPower,
    NotFractionalError,
    build_frac_power_rational,
    evaluate_rational,
    make_pole_set,
    resolvent_denominator_roots,
    select_tau,
)

NU_GRID = np.logspace(-6, 2, 7)


def interlaced(R):
    merged = np.empty(2 * R.k - 1)
    merged[0::2] = R.eta
    merged[1::2] = R.eps
    return np.all(np.diff(merged) < 0) and merged[-1] > 0


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_tau_equal_bounds(alpha):
    sel = select_tau(alpha, 3, 1.0, 1.0)
    assert sel.k_bar == pytest.approx((alpha / 2) ** 2 / 4)
    assert sel.sigma_tilde == 0.0
    # k = 3 exceeds k_bar, so the large-k branch applies
    assert sel.tau == pytest.approx(1.0)
    sel = select_tau(alpha, 5, 7.0, 7.0)
    assert sel.tau == pytest.approx(7.0)


def test_tau_numeric_against_independent_formula():
    alpha, k, lmin, lmax = 1.5, 20, math.pi**2, 4 * 4096.0**2
    a2 = alpha / 2
    kappa = lmax / lmin
    k_bar = a2**2 / 8 * math.sqrt(kappa) * (math.log(kappa) + 2)
    w = lambert_w_bisect(4 * k * k * math.e / a2**2)
    tau_tilde = lmin * (alpha / (4 * k * math.e)) ** 2 * math.exp(2 * w)
    sel = select_tau(alpha, k, lmin, lmax)
    assert k <= k_bar
    assert sel.k_bar == pytest.approx(k_bar, rel=1e-14)
    assert sel.tau == pytest.approx(tau_tilde, rel=1e-11)


def test_tau_large_k_branch():
    lmin, lmax, alpha = 1.0, 4.0, 1.5
    sel = select_tau(alpha, 40, lmin, lmax)
    assert 40 > sel.k_bar
    s = -(alpha / 2) / (8 * 40) * math.log(4.0) * 2.0
    assert sel.tau == pytest.approx((s + math.sqrt(s * s + 2.0)) ** 2, rel=1e-14)


def test_domain_errors():
    with pytest.raises(ValueError):
        select_tau(1.5, 0, 1.0, 2.0)
    with pytest.raises(ValueError):
        select_tau(1.5, 3, 2.0, 1.0)
    with pytest.raises(NotFractionalError):
        select_tau(2.0, 3, 1.0, 2.0)
    with pytest.raises(NotFractionalError):
        make_pole_set(FracResolvent(2.0, 1.0), 3, 1.0, 2.0)
    with pytest.raises(ValueError):
        FracResolvent(1.5, 0.0)
    R = build_frac_power_rational(1.5, 3, 1.0)
    with pytest.raises(ValueError):
        evaluate_rational(R, -1.0)
    with pytest.raises(ValueError):
        resolvent_denominator_roots(R, -1.0)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_k1_closed_forms(alpha):
    tau = 3.7
    R = build_frac_power_rational(alpha, 1, tau)
    assert R.eps.size == 0
    assert R.eta[0] == pytest.approx(tau * (2 - alpha) / alpha, rel=1e-14)
    chi = R.eta[0] / (tau ** (alpha / 2) * (1 - alpha / 2))
    assert R.chi == pytest.approx(chi, rel=1e-13)
    assert evaluate_rational(R, 0.0) == pytest.approx(1 / (tau ** (alpha / 2) * (1 - alpha / 2)), rel=1e-13)
    for nu in (1e-3, 1.0, 50.0):
        xi = resolvent_denominator_roots(R, nu)
        assert xi == pytest.approx([R.eta[0] + R.chi / nu], rel=1e-14)
        assert make_pole_set(FracResolvent(alpha, nu), 1, 1.0, 10.0).xi[0] == pytest.approx(
            make_pole_set(InverseFracPower(alpha), 1, 1.0, 10.0).xi[0]
            + make_pole_set(InverseFracPower(alpha), 1, 1.0, 10.0).rational.chi / nu,
            rel=1e-14,
        )


def test_inverse_power_poles_are_eta():
    ps = make_pole_set(InverseFracPower(1.5), 7, 1.0, 1e4)
    np.testing.assert_array_equal(ps.xi, np.sort(ps.rational.eta))
    assert not ps.xi.flags.writeable


def test_chebyshev_case_accuracy():
    # alpha = 1 is outside the operational range but the construction is valid
    R = build_frac_power_rational(1.0, 10, 1.0)
    assert abs(evaluate_rational(R, 1.0) - 1.0) <= 1e-3
    R = build_frac_power_rational(1.0, 20, 1.0)
    assert abs(evaluate_rational(R, 4.0) - 0.5) <= 1e-6


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_scalar_accuracy_improves_with_k(alpha):
    z = np.logspace(0, 4, 1000)
    errs = []
    for k in (5, 10, 20, 30):
        tau = select_tau(alpha, k, 1.0, 1e4).tau
        R = build_frac_power_rational(alpha, k, tau)
        errs.append(np.max(np.abs(R(z) * z ** (alpha / 2) - 1)))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs


@given(st.floats(1.05, 1.95), st.integers(1, 40), st.floats(1e-3, 1e6), st.integers(0, 2**32 - 1))
def test_product_equals_partial_fractions(alpha, k, tau, seed):
    R = build_frac_power_rational(alpha, k, tau)
    assert interlaced(R) and R.chi > 0
    z = np.exp(np.random.default_rng(seed).uniform(-5, 20, 100))
    np.testing.assert_allclose(R(z), R.partial_fraction(z), rtol=1e-10)


def check_roots(R, nu, xi):
    """Bracket structure, sign change at each root, simplicity."""
    k = R.k
    assert xi.shape == (k,)
    assert np.all(np.isfinite(xi)) and np.all(xi > 0)
    assert np.all(np.diff(xi) > 0)
    eta = np.sort(R.eta)
    # one root per (eta_j, eta_{j+1}) and one beyond the largest eta
    assert np.all(xi > eta)
    assert np.all(xi[:-1] < eta[1:])
    s_eta = qtilde_sign(R, nu, eta)
    assert np.all(s_eta[:-1] * s_eta[1:] < 0)
    # the sign flips across each root, checked in extended precision
    lo = np.maximum(xi * (1 - 1e-9), eta)
    hi = np.minimum(xi * (1 + 1e-9), np.concatenate([eta[1:], [np.inf]]))
    assert np.all(qtilde_sign(R, nu, lo) * qtilde_sign(R, nu, hi) <= 0)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_resolvent_roots_grid(alpha):
    lam = eigenvalues_1d(4096)
    for k in range(1, 31):
        for nu in NU_GRID:
            ps = make_pole_set(FracResolvent(alpha, float(nu)), k, lam[0], lam[-1])
            check_roots(ps.rational, nu, ps.xi)


def test_large_nu_limit():
    R = build_frac_power_rational(1.5, 12, 50.0)
    xi = resolvent_denominator_roots(R, 1e12)
    np.testing.assert_allclose(xi, np.sort(R.eta), rtol=1e-6)


def test_fd_pole_table_configuration():
    n = 4096
    lam = eigenvalues_1d(n)
    nu = 1 / (n + 1)
    for k in (10, 20, 30):
        ps = make_pole_set(FracResolvent(1.2, nu), k, lam[0], lam[-1])
        check_roots(ps.rational, nu, ps.xi)
        assert ps.tau == ps.tau_selection.tau


def test_tau_override():
    t = FracResolvent(1.5, 0.1)
    ps = make_pole_set(t, 6, 1.0, 100.0, tau=2.5)
    assert ps.tau == 2.5 and ps.rational.tau == 2.5
    assert ps.tau_selection.tau != 2.5
